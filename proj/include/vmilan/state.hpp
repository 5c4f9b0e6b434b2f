#pragma once

#include "vmilan/types.hpp"

namespace vmilan {

/// Diagonal scaling matrix D_k, restricted to the set of matrices whose
/// eigenvalues lie in [1/mu_bound, mu_bound].
struct DiagonalMetric {
  Vector diag;  // diagonal of D (not of D^{-1})
  double mu_bound = 1.0;

  static DiagonalMetric identity(Index n, double mu);
  /// Builds D from requested entries of D^{-1}, each clamped into [1/mu, mu].
  /// A NaN request maps to the lower clamp 1/mu.
  static DiagonalMetric from_inverse(const Vector& inverse_request, double mu);

  Index size() const { return diag.size(); }
  Vector inverse() const { return diag.cwiseInverse(); }
  /// ||v||_D^2 = sum_i d_i v_i^2
  double norm_sq(const Vector& v) const;
  /// ||v||_{D^{-1}}^2 = sum_i v_i^2 / d_i
  double inverse_norm_sq(const Vector& v) const;
  /// Entries inside [1/mu_bound, mu_bound].
  bool valid() const;
};

/// Outer iterate x^(k) together with the quantities fixed at Step 1.
struct IterateState {
  Vector x;
  double f_value = 0.0;   // f0(x) + f1(x)
  double f1_value = 0.0;  // f1(x), cached for h_gamma and the dual objective
  Vector grad_f0;
  double alpha = 1.0;
  DiagonalMetric metric;
  int k = 0;
};

}  // namespace vmilan
