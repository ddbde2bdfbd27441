#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <vector>

namespace ubound {

// Coefficients against the L2-normalized sine modes phi_k(x) = sqrt(2/L) sin(k pi x / L).
using ModalVector = Eigen::VectorXd;

// Samples at the interior nodes x_j = j L / (num_quad + 1), j = 1..num_quad.
struct NodalField {
  Eigen::VectorXd values;
};

enum class OperatorKind { Wave1D, Beam1DSimplySupported, Abstract };

enum class ZKind { LalphaPlus2, L2, H10 };

// Which intermediate space Z a norm refers to. alpha only matters for LalphaPlus2.
struct ZSpace {
  ZKind kind = ZKind::L2;
  double alpha = 0.0;
};

std::string_view to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(std::string_view name);
std::string_view to_string(ZKind kind);

/// Diagonal positive operator A on the first N sine modes of (0, L), together with
/// the nodal grid used for pointwise nonlinearities.
///
/// The grid is uniform with zero boundary values, so the rule with weight
/// L / (num_quad + 1) integrates products of two modes exactly whenever
/// num_quad >= N. Immutable after construction.
class SpectralOperator {
 public:
  SpectralOperator(OperatorKind kind, int num_modes, double length,
                   std::optional<std::vector<double>> lambda_override = std::nullopt,
                   std::optional<int> num_quad = std::nullopt);

  OperatorKind kind() const { return kind_; }
  int num_modes() const { return num_modes_; }
  double length() const { return length_; }
  int num_quad() const { return num_quad_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::VectorXd& lambda() const { return lambda_; }
  double embedding_P() const { return embedding_P_; }
  double quad_weight() const { return quad_weight_; }
  // Sum of the quadrature weights, the discrete measure of the interval.
  double quad_measure() const { return quad_weight_ * num_quad_; }
  Eigen::VectorXd nodes() const;
  // (num_quad x N) matrix of phi_k(x_j).
  const Eigen::MatrixXd& synthesis() const { return synthesis_; }

  ModalVector zero() const { return ModalVector::Zero(num_modes_); }
  ModalVector unit(int k) const;  // e_k, 1-based

  void check_dim(const ModalVector& m) const;

 private:
  OperatorKind kind_;
  int num_modes_;
  double length_;
  int num_quad_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd lambda_;
  double embedding_P_;
  double quad_weight_;
  Eigen::MatrixXd synthesis_;
};

SpectralOperator make_operator(OperatorKind kind, int num_modes, double length = 3.14159265358979323846,
                               std::optional<std::vector<double>> lambda_override = std::nullopt);

double norm_H(const SpectralOperator& op, const ModalVector& m);
double norm_V(const SpectralOperator& op, const ModalVector& m);
double norm_Z(const SpectralOperator& op, const ModalVector& m, ZSpace z);
// V-inner product (m, w)_V = sum lambda_k m_k w_k.
double inner_V(const SpectralOperator& op, const ModalVector& m, const ModalVector& w);
// Dual norms: ||m||_{V'} = sqrt(sum m_k^2 / lambda_k), ||m||_{H^-1} = sqrt(sum m_k^2 / mu_k).
double norm_Vdual(const SpectralOperator& op, const ModalVector& m);
double norm_H10dual(const SpectralOperator& op, const ModalVector& m);
// Discrete L^p norm of nodal samples under the operator's quadrature.
double nodal_lp_norm(const SpectralOperator& op, const NodalField& f, double p);

NodalField to_nodal(const SpectralOperator& op, const ModalVector& m);
ModalVector to_modal(const SpectralOperator& op, const NodalField& f);
ModalVector apply_A(const SpectralOperator& op, const ModalVector& m);

}  // namespace ubound
