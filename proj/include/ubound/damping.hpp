#pragma once

#include <string_view>
#include <vector>

#include "ubound/spectral_model.hpp"

namespace ubound {

enum class DampingFamily { LocalPower, AveragedH, StructuralAveraged, LinearViscous };

std::string_view to_string(DampingFamily family);
DampingFamily damping_family_from_string(std::string_view name);

// One damping law with strength c and growth exponent alpha:
//   LocalPower          c |v(x)|^alpha v(x), applied pointwise on the nodal grid
//   AveragedH           c |v|_H^alpha v
//   StructuralAveraged  c (sum mu_j v_j^2)^(alpha/2) (-Laplacian) v
struct DampingTerm {
  DampingFamily family = DampingFamily::AveragedH;
  double c = 1.0;
  double alpha = 0.0;
};

/// Monotone, odd damping g as a finite sum of terms. A single-term op is the
/// usual case; sums express dampings such as v + |v|^2 v.
///
/// LinearViscous is stored as AveragedH with alpha = 0.
class DampingOp {
 public:
  DampingOp(DampingFamily family, double c, double alpha);
  explicit DampingOp(std::vector<DampingTerm> terms);

  const std::vector<DampingTerm>& terms() const { return terms_; }
  bool is_single() const { return terms_.size() == 1; }
  // Leading term accessors; meaningful for single-term ops.
  DampingFamily family() const { return terms_.front().family; }
  double c() const { return terms_.front().c; }
  double alpha() const { return terms_.front().alpha; }
  double max_alpha() const;
  bool has_local_term() const;

  DampingOp operator+(const DampingOp& other) const;

 private:
  std::vector<DampingTerm> terms_;
};

// Z space in which a term's coercivity and growth are naturally expressed.
ZSpace natural_z(const DampingTerm& term);

ModalVector apply_g(const SpectralOperator& op, const DampingOp& g, const ModalVector& v);
// <g(v), v>, never negative.
double dissipation(const SpectralOperator& op, const DampingOp& g, const ModalVector& v);
// Derivative of v -> apply_g(v); symmetric positive semidefinite.
Eigen::MatrixXd jacobian_g(const SpectralOperator& op, const DampingOp& g, const ModalVector& v);

enum class Condition { General32_33, Power41_42, AntiPeriodic54 };
enum class CertificateProvenance { Analytic, Optimized };

std::string_view to_string(Condition condition);

/// Constants witnessing a coercivity/growth pair on the truncated model.
///
/// General32_33:    <g(v),v> >= gamma |v|^2 - C1,            |g(v)|_{V'} <= C2 + K <g(v),v>
/// Power41_42:      <g(v),v> >= gamma |v|_Z^(a+2) - C1,      |g(v)|_{V'} <= C2 + K |v|_Z^(a+1)
/// AntiPeriodic54:  coercivity as Power41_42,                |g(v)|_{Z'} <= C2 + K |v|_Z^(a+1)
struct DampingCertificate {
  Condition condition = Condition::General32_33;
  double gamma = 0.0;
  double C1 = 0.0;
  double K = 0.0;
  double C2 = 0.0;
  ZSpace z;  // a = z.alpha for the power conditions
  CertificateProvenance provenance = CertificateProvenance::Analytic;
};

// Throws NoCertificateError when the terms do not share a Z space for the
// power conditions.
DampingCertificate certificate(const SpectralOperator& op, const DampingOp& g, Condition condition);

// Slack (right side minus left side, oriented so >= 0 means the inequality holds)
// of both certified inequalities at v. The Z' norm for L^{alpha+2} is replaced by
// the discrete Hoelder bound, which dominates the true dual norm.
struct CertificateSlack {
  double coercivity = 0.0;
  double growth = 0.0;
};
CertificateSlack certificate_slack(const SpectralOperator& op, const DampingOp& g, const DampingCertificate& cert,
                                   const ModalVector& v);

// Upper bound on ||w||_{Z'} for a modal w; exact for L2 and H10.
double dual_norm_Z(const SpectralOperator& op, const ModalVector& w, ZSpace z);

}  // namespace ubound
