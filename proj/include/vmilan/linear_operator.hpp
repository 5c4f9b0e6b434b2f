#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vmilan/types.hpp"

namespace vmilan {

/// Real linear map R^cols -> R^rows with an explicit adjoint.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  /// out = A * in. `out` is resized as needed.
  virtual void apply(const Vector& in, Vector& out) const = 0;
  /// out = A^T * in.
  virtual void adjoint(const Vector& in, Vector& out) const = 0;

  Vector apply(const Vector& in) const {
    Vector out;
    apply(in, out);
    return out;
  }
  Vector adjoint(const Vector& in) const {
    Vector out;
    adjoint(in, out);
    return out;
  }

 protected:
  void check_apply_input(const Vector& in) const;
  void check_adjoint_input(const Vector& in) const;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(Index n) : n_(n) {}
  Index rows() const override { return n_; }
  Index cols() const override { return n_; }
  void apply(const Vector& in, Vector& out) const override;
  void adjoint(const Vector& in, Vector& out) const override;
  using LinearOperator::adjoint;
  using LinearOperator::apply;

 private:
  Index n_;
};

/// Vertical concatenation [A_1; A_2; ...] of operators sharing a domain.
class StackedOperator final : public LinearOperator {
 public:
  explicit StackedOperator(std::vector<std::shared_ptr<const LinearOperator>> blocks);

  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  void apply(const Vector& in, Vector& out) const override;
  void adjoint(const Vector& in, Vector& out) const override;
  using LinearOperator::adjoint;
  using LinearOperator::apply;

  const std::vector<std::shared_ptr<const LinearOperator>>& blocks() const { return blocks_; }

 private:
  std::vector<std::shared_ptr<const LinearOperator>> blocks_;
  Index rows_ = 0;
  Index cols_ = 0;
};

/// Estimate of ||A||^2 (largest eigenvalue of A^T A) by power iteration from
/// a seeded random start. The estimate approaches the true value from below.
double estimate_norm_squared(const LinearOperator& op, int iterations = 50,
                             std::uint64_t seed = 0x5eed);

}  // namespace vmilan
