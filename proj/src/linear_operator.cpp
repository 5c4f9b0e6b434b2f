#include "vmilan/linear_operator.hpp"

#include <random>
#include <string>

namespace vmilan {

void LinearOperator::check_apply_input(const Vector& in) const {
  if (in.size() != cols()) {
    throw DimensionMismatch("operator apply: expected " + std::to_string(cols()) + " entries, got " +
                            std::to_string(in.size()));
  }
}

void LinearOperator::check_adjoint_input(const Vector& in) const {
  if (in.size() != rows()) {
    throw DimensionMismatch("operator adjoint: expected " + std::to_string(rows()) +
                            " entries, got " + std::to_string(in.size()));
  }
}

void IdentityOperator::apply(const Vector& in, Vector& out) const {
  check_apply_input(in);
  out = in;
}

void IdentityOperator::adjoint(const Vector& in, Vector& out) const {
  check_adjoint_input(in);
  out = in;
}

StackedOperator::StackedOperator(std::vector<std::shared_ptr<const LinearOperator>> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw DimensionMismatch("stacked operator needs at least one block");
  cols_ = blocks_.front()->cols();
  for (const auto& b : blocks_) {
    if (b->cols() != cols_) throw DimensionMismatch("stacked operator blocks differ in domain size");
    rows_ += b->rows();
  }
}

void StackedOperator::apply(const Vector& in, Vector& out) const {
  check_apply_input(in);
  out.resize(rows_);
  Index offset = 0;
  Vector part;
  for (const auto& b : blocks_) {
    b->apply(in, part);
    out.segment(offset, b->rows()) = part;
    offset += b->rows();
  }
}

void StackedOperator::adjoint(const Vector& in, Vector& out) const {
  check_adjoint_input(in);
  out = Vector::Zero(cols_);
  Index offset = 0;
  Vector part;
  for (const auto& b : blocks_) {
    b->adjoint(in.segment(offset, b->rows()), part);
    out += part;
    offset += b->rows();
  }
}

double estimate_norm_squared(const LinearOperator& op, int iterations, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector v(op.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = unit(rng);
  double norm = v.norm();
  if (norm == 0.0) return 0.0;
  v /= norm;

  double estimate = 0.0;
  Vector av, atav;
  for (int it = 0; it < iterations; ++it) {
    op.apply(v, av);
    op.adjoint(av, atav);
    estimate = v.dot(atav);
    norm = atav.norm();
    if (norm == 0.0) return 0.0;
    v = atav / norm;
  }
  return estimate;
}

}  // namespace vmilan
