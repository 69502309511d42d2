#include "weakpath/gaussian.h"

#include <cmath>
#include <numbers>

namespace weakpath {

double gaussian_overlap(double a, double b, double sigma) {
    double d = a - b;
    return std::exp(-d * d / (8 * sigma * sigma));
}

double position_element(double a, double b, double sigma) {
    return 0.5 * (a + b) * gaussian_overlap(a, b, sigma);
}

std::complex<double> momentum_element(double a, double b, double sigma) {
    return {0.0, (a - b) / (4 * sigma * sigma) * gaussian_overlap(a, b, sigma)};
}

std::complex<double> pointer_element(PointerOp op, double a, double b, double sigma) {
    double o = gaussian_overlap(a, b, sigma);
    double s2 = sigma * sigma;
    switch (op) {
        case PointerOp::identity:
            return o;
        case PointerOp::x:
            return position_element(a, b, sigma);
        case PointerOp::p:
            return momentum_element(a, b, sigma);
        case PointerOp::x2: {
            // The product φ_a φ_b is o times a normal density N((a+b)/2, σ²).
            double m = 0.5 * (a + b);
            return (s2 + m * m) * o;
        }
        case PointerOp::p2: {
            double d = a - b;
            return (s2 - 0.25 * d * d) / (4 * s2 * s2) * o;
        }
        case PointerOp::zeta:
            return b * o;
    }
    return 0.0;
}

double pointer_wavefunction(double x, double sigma) {
    return std::pow(2 * std::numbers::pi * sigma * sigma, -0.25) * std::exp(-x * x / (4 * sigma * sigma));
}

double pointer_momentum_density(double p, double sigma) {
    // |φ̃(p)|² is normal with variance 1/(4σ²).
    return std::sqrt(2 * sigma * sigma / std::numbers::pi) * std::exp(-2 * sigma * sigma * p * p);
}

}  // namespace weakpath
