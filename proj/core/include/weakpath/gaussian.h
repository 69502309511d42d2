#ifndef WEAKPATH_GAUSSIAN_H
#define WEAKPATH_GAUSSIAN_H

#include <complex>

namespace weakpath {

/// Pointer observables whose matrix elements between displaced Gaussians are
/// known in closed form. `zeta` is x̂ + 2iσ²p̂, which annihilates the
/// undisplaced pointer and returns the displacement on a displaced one.
enum class PointerOp { identity, x, p, x2, p2, zeta };

// All functions below take φ_c(x) = (2πσ²)^(-1/4) exp(-(x-c)²/(4σ²)), ħ = 1.

/// ⟨φ_a|φ_b⟩ = exp(-(a-b)²/(8σ²)).
double gaussian_overlap(double a, double b, double sigma);

/// ⟨φ_a|x̂|φ_b⟩ = ((a+b)/2) ⟨φ_a|φ_b⟩.
double position_element(double a, double b, double sigma);

/// ⟨φ_a|p̂|φ_b⟩ = i(a-b)/(4σ²) ⟨φ_a|φ_b⟩.
std::complex<double> momentum_element(double a, double b, double sigma);

/// ⟨φ_a|op|φ_b⟩ for any supported pointer operator.
std::complex<double> pointer_element(PointerOp op, double a, double b, double sigma);

/// Undisplaced pointer wavefunction in position and momentum representation.
double pointer_wavefunction(double x, double sigma);
double pointer_momentum_density(double p, double sigma);

}  // namespace weakpath

#endif
