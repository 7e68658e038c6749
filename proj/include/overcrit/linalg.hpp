#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>

namespace overcrit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Closed energy interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double e) const { return e >= lo && e <= hi; }
    double width() const { return hi - lo; }
};

// ||A - A^dagger||_F relative to ||A||_F (absolute when A vanishes).
double hermiticity_defect(const Matrix& a);

// ||U^dagger U - I||_F.
double unitarity_defect(const Matrix& u);

double operator_norm(const Matrix& a);

inline std::span<const double> as_span(const RealVector& v)
{
    return { v.data(), static_cast<size_t>(v.size()) };
}

} // namespace overcrit
