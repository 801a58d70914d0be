#pragma once

// Scalar transition coefficients of one frozen-gradient step.
//
// Every block of the Gaussian transition is a function of the single SPD
// matrix A, so along an eigenvector of A with eigenvalue alpha the step
// reduces to scalars. With b = gamma * alpha and z = b * delta:
//
//   E[v'] = e^{-z} v - u (1 - e^{-z}) / b * g
//   E[x'] = x + (1 - e^{-z}) / b * v - u (z - 1 + e^{-z}) / b^2 * g
//   Var v' = u (1 - e^{-2z})
//   Cov(x', v') = u (1 - e^{-z})^2 / b
//   Var x' = 2u / b^2 * int_0^z (1 - e^{-s})^2 ds
//
// The expressions with cancellation at small z are evaluated by series.

#include <cmath>

namespace uldmc {

template <typename Scalar>
struct StepCoefficients {
    Scalar v_from_v;  // e^{-z}
    Scalar v_from_g;
    Scalar x_from_v;
    Scalar x_from_g;
    Scalar cov_vv;
    Scalar cov_xv;
    Scalar cov_xx;
};

namespace detail {

inline constexpr double kSeriesCutoff = 0.5;

// z - 1 + e^{-z} = sum_{k>=2} (-z)^k / k!
template <typename Scalar>
Scalar drift_gap(Scalar z) {
    if (z >= Scalar(kSeriesCutoff)) return z + std::expm1(-z);
    Scalar term = z * z / Scalar(2);
    Scalar sum = term;
    for (int k = 3; k < 30; ++k) {
        term *= -z / Scalar(k);
        sum += term;
    }
    return sum;
}

// int_0^z (1 - e^{-s})^2 ds = sum_{k>=2} (-1)^k (2^k - 2) z^{k+1} / (k+1)!
template <typename Scalar>
Scalar position_spread(Scalar z) {
    if (z >= Scalar(kSeriesCutoff)) return z + Scalar(2) * std::expm1(-z) - std::expm1(Scalar(-2) * z) / Scalar(2);
    Scalar power = z * z * z / Scalar(6);  // z^{k+1}/(k+1)! at k = 2
    Scalar two_k = Scalar(4);
    Scalar sum = Scalar(0);
    for (int k = 2; k < 30; ++k) {
        const Scalar sign = (k % 2 == 0) ? Scalar(1) : Scalar(-1);
        sum += sign * (two_k - Scalar(2)) * power;
        power *= z / Scalar(k + 2);
        two_k *= Scalar(2);
    }
    return sum;
}

} // namespace detail

template <typename Scalar>
StepCoefficients<Scalar> step_coefficients(Scalar alpha, Scalar gamma, Scalar u, Scalar delta) {
    const Scalar b = gamma * alpha;
    const Scalar z = b * delta;
    const Scalar one_minus = -std::expm1(-z);
    StepCoefficients<Scalar> c;
    c.v_from_v = std::exp(-z);
    c.v_from_g = -u * one_minus / b;
    c.x_from_v = one_minus / b;
    c.x_from_g = -u * detail::drift_gap(z) / (b * b);
    c.cov_vv = -u * std::expm1(Scalar(-2) * z);
    c.cov_xv = u * one_minus * one_minus / b;
    c.cov_xx = Scalar(2) * u * detail::position_spread(z) / (b * b);
    return c;
}

} // namespace uldmc
