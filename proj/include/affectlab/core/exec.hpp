#pragma once

namespace affectlab {

// Selects between the OpenMP kernel and its serial reference. Library
// entry points default to `parallel`; tests pin `serial` to cross-check.
enum class Exec { serial, parallel };

int max_threads();
void set_threads(int n);

}  // namespace affectlab
