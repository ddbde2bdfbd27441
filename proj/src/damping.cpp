#include "ubound/damping.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ubound/errors.hpp"

namespace ubound {

std::string_view to_string(DampingFamily family) {
  switch (family) {
    case DampingFamily::LocalPower: return "LocalPower";
    case DampingFamily::AveragedH: return "AveragedH";
    case DampingFamily::StructuralAveraged: return "StructuralAveraged";
    case DampingFamily::LinearViscous: return "LinearViscous";
  }
  return "?";
}

DampingFamily damping_family_from_string(std::string_view name) {
  if (name == "LocalPower") return DampingFamily::LocalPower;
  if (name == "AveragedH") return DampingFamily::AveragedH;
  if (name == "StructuralAveraged") return DampingFamily::StructuralAveraged;
  if (name == "LinearViscous") return DampingFamily::LinearViscous;
  throw ValidationError("unknown damping family '" + std::string(name) + "'");
}

std::string_view to_string(Condition condition) {
  switch (condition) {
    case Condition::General32_33: return "General32_33";
    case Condition::Power41_42: return "Power41_42";
    case Condition::AntiPeriodic54: return "AntiPeriodic54";
  }
  return "?";
}

namespace {

DampingTerm normalized(DampingTerm term) {
  if (!(term.c > 0.0) || !std::isfinite(term.c)) throw ValidationError("damping c must be positive");
  if (!(term.alpha >= 0.0) || !std::isfinite(term.alpha)) throw ValidationError("damping alpha must be >= 0");
  if (term.family == DampingFamily::LinearViscous) {
    if (term.alpha != 0.0) throw ValidationError("LinearViscous damping has alpha = 0");
    term.family = DampingFamily::AveragedH;
  }
  return term;
}

// |x|^alpha x without NaN at x = 0 for fractional alpha.
double signed_power(double x, double alpha) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), alpha + 1.0), x);
}

// Square of the H10 seminorm, sum mu_k v_k^2.
double h10_squared(const SpectralOperator& op, const ModalVector& v) {
  return (op.mu().array() * v.array().square()).sum();
}

}  // namespace

DampingOp::DampingOp(DampingFamily family, double c, double alpha)
    : terms_{normalized(DampingTerm{family, c, alpha})} {}

DampingOp::DampingOp(std::vector<DampingTerm> terms) {
  if (terms.empty()) throw ValidationError("damping needs at least one term");
  for (auto& t : terms) terms_.push_back(normalized(t));
}

double DampingOp::max_alpha() const {
  double a = 0.0;
  for (const auto& t : terms_) a = std::max(a, t.alpha);
  return a;
}

bool DampingOp::has_local_term() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const DampingTerm& t) { return t.family == DampingFamily::LocalPower; });
}

DampingOp DampingOp::operator+(const DampingOp& other) const {
  auto all = terms_;
  all.insert(all.end(), other.terms_.begin(), other.terms_.end());
  return DampingOp(std::move(all));
}

ZSpace natural_z(const DampingTerm& term) {
  switch (term.family) {
    case DampingFamily::LocalPower: return {ZKind::LalphaPlus2, term.alpha};
    case DampingFamily::StructuralAveraged: return {ZKind::H10, term.alpha};
    case DampingFamily::AveragedH:
    case DampingFamily::LinearViscous: return {ZKind::L2, term.alpha};
  }
  return {};
}

namespace {

// Nodal values of the local terms, sum_i c_i |f|^alpha_i f, before projection.
Eigen::VectorXd local_nodal_image(const DampingOp& g, const Eigen::VectorXd& f) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
  for (const auto& t : g.terms()) {
    if (t.family != DampingFamily::LocalPower) continue;
    for (Eigen::Index j = 0; j < f.size(); ++j) out[j] += t.c * signed_power(f[j], t.alpha);
  }
  return out;
}

}  // namespace

ModalVector apply_g(const SpectralOperator& op, const DampingOp& g, const ModalVector& v) {
  op.check_dim(v);
  ModalVector out = op.zero();
  if (g.has_local_term()) {
    const NodalField f = to_nodal(op, v);
    out += to_modal(op, NodalField{local_nodal_image(g, f.values)});
  }
  for (const auto& t : g.terms()) {
    switch (t.family) {
      case DampingFamily::LocalPower: break;
      case DampingFamily::AveragedH:
      case DampingFamily::LinearViscous: {
        const double s = v.norm();
        const double factor = t.alpha == 0.0 ? t.c : (s == 0.0 ? 0.0 : t.c * std::pow(s, t.alpha));
        out += factor * v;
        break;
      }
      case DampingFamily::StructuralAveraged: {
        const double sigma = h10_squared(op, v);
        const double factor = t.alpha == 0.0 ? t.c : (sigma == 0.0 ? 0.0 : t.c * std::pow(sigma, 0.5 * t.alpha));
        out += factor * op.mu().cwiseProduct(v);
        break;
      }
    }
  }
  return out;
}

double dissipation(const SpectralOperator& op, const DampingOp& g, const ModalVector& v) {
  op.check_dim(v);
  double total = 0.0;
  Eigen::VectorXd f;
  if (g.has_local_term()) f = to_nodal(op, v).values;
  for (const auto& t : g.terms()) {
    switch (t.family) {
      case DampingFamily::LocalPower: {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < f.size(); ++j) sum += std::pow(std::abs(f[j]), t.alpha + 2.0);
        total += t.c * op.quad_weight() * sum;
        break;
      }
      case DampingFamily::AveragedH:
      case DampingFamily::LinearViscous:
        total += t.c * std::pow(v.norm(), t.alpha + 2.0);
        break;
      case DampingFamily::StructuralAveraged:
        total += t.c * std::pow(h10_squared(op, v), 0.5 * (t.alpha + 2.0));
        break;
    }
  }
  return total;
}

Eigen::MatrixXd jacobian_g(const SpectralOperator& op, const DampingOp& g, const ModalVector& v) {
  op.check_dim(v);
  const int n = op.num_modes();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd f;
  if (g.has_local_term()) f = to_nodal(op, v).values;
  for (const auto& t : g.terms()) {
    switch (t.family) {
      case DampingFamily::LocalPower: {
        Eigen::VectorXd d(f.size());
        for (Eigen::Index j = 0; j < f.size(); ++j)
          d[j] = t.c * (t.alpha + 1.0) * (t.alpha == 0.0 ? 1.0 : std::pow(std::abs(f[j]), t.alpha));
        const Eigen::MatrixXd& S = op.synthesis();
        jac += op.quad_weight() * (S.transpose() * d.asDiagonal() * S);
        break;
      }
      case DampingFamily::AveragedH:
      case DampingFamily::LinearViscous: {
        const double s = v.norm();
        if (t.alpha == 0.0) {
          jac.diagonal().array() += t.c;
        } else if (s > 0.0) {
          jac.diagonal().array() += t.c * std::pow(s, t.alpha);
          jac += t.c * t.alpha * std::pow(s, t.alpha - 2.0) * (v * v.transpose());
        }
        break;
      }
      case DampingFamily::StructuralAveraged: {
        const double sigma = h10_squared(op, v);
        if (t.alpha == 0.0) {
          jac.diagonal() += t.c * op.mu();
        } else if (sigma > 0.0) {
          const Eigen::VectorXd mv = op.mu().cwiseProduct(v);
          jac.diagonal() += t.c * std::pow(sigma, 0.5 * t.alpha) * op.mu();
          jac += t.c * t.alpha * std::pow(sigma, 0.5 * t.alpha - 1.0) * (mv * mv.transpose());
        }
        break;
      }
    }
  }
  return jac;
}

namespace {

// Every term is a radial power law in its own norm rho of v:
//   <g_i(v), v> = c rho^(alpha+2),  |g_i(v)|_{V'} <= aV rho^(alpha+1),
//   |g_i(v)|_{Z'} <= aZ rho^(alpha+1),  |v|_H^2 <= kappa rho^2.
struct RadialTerm {
  double c;
  double alpha;
  double aV;
  double aZ;
  double kappa;
  ZSpace z;
};

RadialTerm radial(const SpectralOperator& op, const DampingTerm& t) {
  RadialTerm r{t.c, t.alpha, 0.0, t.c, 1.0, natural_z(t)};
  switch (t.family) {
    case DampingFamily::AveragedH:
    case DampingFamily::LinearViscous:
      r.aV = t.c * op.embedding_P();
      break;
    case DampingFamily::StructuralAveraged:
      r.aV = t.c * std::sqrt((op.mu().array() / op.lambda().array()).maxCoeff());
      r.kappa = 1.0 / op.mu()[0];
      break;
    case DampingFamily::LocalPower: {
      const double p = t.alpha + 2.0;
      const double measure = op.quad_measure();
      // |g|_{V'} <= |g|_{L1} sup|z| / |z|_V and the 1-D bound sup|z| <= sqrt(2/L) sqrt(sum 1/lambda) |z|_V.
      const double sup_embed = std::sqrt(2.0 / op.length()) * std::sqrt((1.0 / op.lambda().array()).sum());
      r.aV = t.c * sup_embed * std::pow(measure, 1.0 / p);
      r.kappa = std::pow(measure, t.alpha / p);
      break;
    }
  }
  return r;
}

// sup_{rho >= 0} (rho^beta - rho^delta) for 0 < beta < delta.
double power_gap(double beta, double delta) {
  if (beta >= delta) return 0.0;
  const double ratio = beta / delta;
  return (1.0 - ratio) * std::pow(ratio, beta / (delta - beta));
}

// sup_rho (a rho^(alpha+1) - K c rho^(alpha+2)), the Young remainder.
double young_remainder(double a, double c, double alpha, double K) {
  if (a == 0.0) return 0.0;
  const double r = a * (alpha + 1.0) / (K * c * (alpha + 2.0));
  return a * std::pow(r, alpha + 1.0) / (alpha + 2.0);
}

template <class F>
double golden_minimize(F&& f, double lo, double hi, int iterations = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations && b - a > 1e-12; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

bool same_space(ZSpace a, ZSpace b) {
  if (a.kind != b.kind) return false;
  return a.kind != ZKind::LalphaPlus2 || a.alpha == b.alpha;
}

}  // namespace

DampingCertificate certificate(const SpectralOperator& op, const DampingOp& g, Condition condition) {
  std::vector<RadialTerm> terms;
  for (const auto& t : g.terms()) terms.push_back(radial(op, t));

  DampingCertificate cert;
  cert.condition = condition;

  if (condition == Condition::General32_33) {
    cert.z = {ZKind::L2, 0.0};
    for (const auto& t : terms) {
      cert.gamma += t.c / t.kappa;
      if (t.alpha > 0.0) cert.C1 += t.c * power_gap(2.0, t.alpha + 2.0);
    }
    // The split between K and C2 is free; pick the K minimizing K + C2.
    auto remainder = [&](double K) {
      double c2 = 0.0;
      for (const auto& t : terms) c2 += young_remainder(t.aV, t.c, t.alpha, K);
      return c2;
    };
    const double logK = golden_minimize([&](double x) { return std::exp(x) + remainder(std::exp(x)); }, -30.0, 30.0);
    cert.K = std::exp(logK);
    // Small upward nudge so rounding in the sup formula never leaves a negative slack.
    cert.C2 = remainder(cert.K) * (1.0 + 1e-12);
    cert.provenance = CertificateProvenance::Optimized;
    return cert;
  }

  // Power conditions: every term must live in one Z space.
  const RadialTerm* lead = &terms.front();
  for (const auto& t : terms)
    if (t.alpha > lead->alpha) lead = &t;
  for (const auto& t : terms) {
    if (!same_space(t.z, lead->z) && !(t.z.kind == lead->z.kind && t.z.kind != ZKind::LalphaPlus2))
      throw NoCertificateError("no " + std::string(to_string(condition)) + " certificate: damping terms live in different Z spaces (" +
                               std::string(to_string(t.z.kind)) + " vs " + std::string(to_string(lead->z.kind)) + ")");
  }
  const double alpha = lead->alpha;
  cert.z = {lead->z.kind, alpha};
  cert.provenance = CertificateProvenance::Analytic;
  for (const auto& t : terms) {
    if (t.alpha == alpha) cert.gamma += t.c;
    const double a = condition == Condition::Power41_42 ? t.aV : t.aZ;
    cert.K += a;
    if (t.alpha < alpha) cert.C2 += a * power_gap(t.alpha + 1.0, alpha + 1.0);
  }
  return cert;
}

double dual_norm_Z(const SpectralOperator& op, const ModalVector& w, ZSpace z) {
  switch (z.kind) {
    case ZKind::L2: return norm_H(op, w);
    case ZKind::H10: return norm_H10dual(op, w);
    case ZKind::LalphaPlus2: {
      // <w, z> = quadrature of (S w)(S z), so Hoelder gives |w|_{Z'} <= |S w|_{L^q}.
      const double p = z.alpha + 2.0;
      return nodal_lp_norm(op, to_nodal(op, w), p / (p - 1.0));
    }
  }
  return 0.0;
}

CertificateSlack certificate_slack(const SpectralOperator& op, const DampingOp& g, const DampingCertificate& cert,
                                   const ModalVector& v) {
  const ModalVector gv = apply_g(op, g, v);
  const double diss = dissipation(op, g, v);
  CertificateSlack slack;
  if (cert.condition == Condition::General32_33) {
    slack.coercivity = diss - (cert.gamma * v.squaredNorm() - cert.C1);
    slack.growth = cert.C2 + cert.K * diss - norm_Vdual(op, gv);
    return slack;
  }
  const double zn = norm_Z(op, v, cert.z);
  slack.coercivity = diss - (cert.gamma * std::pow(zn, cert.z.alpha + 2.0) - cert.C1);
  double lhs = 0.0;
  if (cert.condition == Condition::Power41_42) {
    lhs = norm_Vdual(op, gv);
  } else {
    lhs = dual_norm_Z(op, gv, cert.z);
    if (cert.z.kind == ZKind::LalphaPlus2) {
      // The unprojected nodal image is a second admissible Hoelder witness.
      const double p = cert.z.alpha + 2.0;
      const NodalField image{local_nodal_image(g, to_nodal(op, v).values)};
      lhs = std::min(lhs, nodal_lp_norm(op, image, p / (p - 1.0)));
    }
  }
  slack.growth = cert.C2 + cert.K * std::pow(zn, cert.z.alpha + 1.0) - lhs;
  return slack;
}

}  // namespace ubound
