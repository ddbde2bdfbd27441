#include "ubound/spectral_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ubound/errors.hpp"

namespace ubound {

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Wave1D: return "Wave1D";
    case OperatorKind::Beam1DSimplySupported: return "Beam1DSimplySupported";
    case OperatorKind::Abstract: return "Abstract";
  }
  return "?";
}

OperatorKind operator_kind_from_string(std::string_view name) {
  if (name == "Wave1D") return OperatorKind::Wave1D;
  if (name == "Beam1DSimplySupported" || name == "Beam1D") return OperatorKind::Beam1DSimplySupported;
  if (name == "Abstract") return OperatorKind::Abstract;
  throw ValidationError("unknown operator kind '" + std::string(name) + "'");
}

std::string_view to_string(ZKind kind) {
  switch (kind) {
    case ZKind::LalphaPlus2: return "LalphaPlus2";
    case ZKind::L2: return "L2";
    case ZKind::H10: return "H10";
  }
  return "?";
}

SpectralOperator::SpectralOperator(OperatorKind kind, int num_modes, double length,
                                   std::optional<std::vector<double>> lambda_override,
                                   std::optional<int> num_quad)
    : kind_(kind), num_modes_(num_modes), length_(length) {
  if (num_modes < 1) throw ValidationError("num_modes must be >= 1");
  if (!(length > 0.0) || !std::isfinite(length)) throw ValidationError("length must be positive");
  num_quad_ = num_quad.value_or(4 * num_modes);
  if (num_quad_ < 4 * num_modes) throw ValidationError("num_quad must be >= 4 * num_modes");

  // pi / L is exactly 1 for L = pi, which keeps the integer eigenvalues exact.
  const double scale = std::numbers::pi / length;
  mu_.resize(num_modes);
  for (int k = 0; k < num_modes; ++k) {
    const double wavenumber = (k + 1) * scale;
    mu_[k] = wavenumber * wavenumber;
  }

  switch (kind) {
    case OperatorKind::Wave1D:
      if (lambda_override) throw ValidationError("lambda_override is only allowed for Abstract operators");
      lambda_ = mu_;
      break;
    case OperatorKind::Beam1DSimplySupported:
      if (lambda_override) throw ValidationError("lambda_override is only allowed for Abstract operators");
      lambda_ = mu_.array().square();
      break;
    case OperatorKind::Abstract: {
      if (!lambda_override) throw ValidationError("Abstract operator requires lambda_override");
      const auto& values = *lambda_override;
      if (static_cast<int>(values.size()) != num_modes)
        throw ValidationError("lambda_override has " + std::to_string(values.size()) + " entries, expected " +
                              std::to_string(num_modes));
      lambda_.resize(num_modes);
      for (int k = 0; k < num_modes; ++k) {
        if (!(values[k] > 0.0) || !std::isfinite(values[k]))
          throw ValidationError("lambda_override must be strictly positive");
        if (k > 0 && !(values[k] > values[k - 1]))
          throw ValidationError("lambda_override must be strictly increasing");
        lambda_[k] = values[k];
      }
      break;
    }
  }
  embedding_P_ = 1.0 / std::sqrt(lambda_[0]);

  quad_weight_ = length / (num_quad_ + 1);
  const double amp = std::sqrt(2.0 / length);
  synthesis_.resize(num_quad_, num_modes);
  for (int j = 0; j < num_quad_; ++j) {
    for (int k = 0; k < num_modes; ++k) {
      // sin(k pi j / (Q+1)) evaluated from the integer ratio to avoid drift in x_j.
      synthesis_(j, k) = amp * std::sin(std::numbers::pi * double((k + 1) * (j + 1)) / (num_quad_ + 1));
    }
  }
}

Eigen::VectorXd SpectralOperator::nodes() const {
  Eigen::VectorXd x(num_quad_);
  for (int j = 0; j < num_quad_; ++j) x[j] = (j + 1) * quad_weight_;
  return x;
}

ModalVector SpectralOperator::unit(int k) const {
  if (k < 1 || k > num_modes_) throw ValidationError("mode index out of range");
  ModalVector e = zero();
  e[k - 1] = 1.0;
  return e;
}

void SpectralOperator::check_dim(const ModalVector& m) const {
  if (m.size() != num_modes_)
    throw ValidationError("dimension mismatch: vector has " + std::to_string(m.size()) + " coefficients, operator has " +
                          std::to_string(num_modes_) + " modes");
}

SpectralOperator make_operator(OperatorKind kind, int num_modes, double length,
                               std::optional<std::vector<double>> lambda_override) {
  return SpectralOperator(kind, num_modes, length, std::move(lambda_override));
}

double norm_H(const SpectralOperator& op, const ModalVector& m) {
  op.check_dim(m);
  return m.norm();
}

double inner_V(const SpectralOperator& op, const ModalVector& m, const ModalVector& w) {
  op.check_dim(m);
  op.check_dim(w);
  return apply_A(op, m).dot(w);
}

double norm_V(const SpectralOperator& op, const ModalVector& m) {
  op.check_dim(m);
  return std::sqrt((op.lambda().array() * m.array().square()).sum());
}

double norm_Vdual(const SpectralOperator& op, const ModalVector& m) {
  op.check_dim(m);
  return std::sqrt((m.array().square() / op.lambda().array()).sum());
}

double norm_H10dual(const SpectralOperator& op, const ModalVector& m) {
  op.check_dim(m);
  return std::sqrt((m.array().square() / op.mu().array()).sum());
}

double nodal_lp_norm(const SpectralOperator& op, const NodalField& f, double p) {
  if (f.values.size() != op.num_quad()) throw ValidationError("nodal field size does not match num_quad");
  if (!(p >= 1.0)) throw ValidationError("L^p norm needs p >= 1");
  if (p == 2.0) return std::sqrt(op.quad_weight() * f.values.squaredNorm());
  const double scale = f.values.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  // Scaled to keep |f|^p in range for large p.
  const double sum = (f.values.cwiseAbs() / scale).array().pow(p).sum();
  return scale * std::pow(op.quad_weight() * sum, 1.0 / p);
}

double norm_Z(const SpectralOperator& op, const ModalVector& m, ZSpace z) {
  op.check_dim(m);
  switch (z.kind) {
    case ZKind::L2: return m.norm();
    case ZKind::H10: return std::sqrt((op.mu().array() * m.array().square()).sum());
    case ZKind::LalphaPlus2:
      if (!(z.alpha >= 0.0)) throw ValidationError("alpha must be >= 0 for L^{alpha+2} norms");
      return nodal_lp_norm(op, to_nodal(op, m), z.alpha + 2.0);
  }
  return 0.0;
}

NodalField to_nodal(const SpectralOperator& op, const ModalVector& m) {
  op.check_dim(m);
  return NodalField{op.synthesis() * m};
}

ModalVector to_modal(const SpectralOperator& op, const NodalField& f) {
  if (f.values.size() != op.num_quad()) throw ValidationError("nodal field size does not match num_quad");
  return op.quad_weight() * (op.synthesis().transpose() * f.values);
}

ModalVector apply_A(const SpectralOperator& op, const ModalVector& m) {
  op.check_dim(m);
  return op.lambda().cwiseProduct(m);
}

}  // namespace ubound
