#pragma once

namespace shortrace {

// J0 by its power series (long double) for |x| <= 17 and the Hankel
// asymptotic expansion beyond. Absolute error below 1e-12 on the real line.
double bessel_j0(double x);

}  // namespace shortrace
