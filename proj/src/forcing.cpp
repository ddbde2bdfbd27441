#include "ubound/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "ubound/errors.hpp"

namespace ubound {

std::string_view to_string(ForcingKind kind) {
  switch (kind) {
    case ForcingKind::Zero: return "Zero";
    case ForcingKind::ConstantModal: return "ConstantModal";
    case ForcingKind::Sinusoidal: return "Sinusoidal";
    case ForcingKind::PowerOfSine: return "PowerOfSine";
    case ForcingKind::Sampled: return "Sampled";
    case ForcingKind::Sum: return "Sum";
  }
  return "?";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw ValidationError(std::string(what) + " must be finite");
}

void require_omega(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ValidationError("omega must be positive");
}

}  // namespace

ForcingSignal ForcingSignal::zero(int dim) {
  if (dim < 1) throw ValidationError("forcing dimension must be >= 1");
  return ForcingSignal(dim, ZeroData{});
}

ForcingSignal ForcingSignal::constant(ModalVector profile) {
  if (profile.size() < 1) throw ValidationError("empty forcing profile");
  const int n = static_cast<int>(profile.size());
  return ForcingSignal(n, ConstantData{std::move(profile)});
}

ForcingSignal ForcingSignal::sinusoidal(ModalVector profile, double amplitude, double omega, double phase) {
  if (profile.size() < 1) throw ValidationError("empty forcing profile");
  require_finite(amplitude, "amplitude");
  require_finite(phase, "phase");
  require_omega(omega);
  const int n = static_cast<int>(profile.size());
  return ForcingSignal(n, SinusoidalData{std::move(profile), amplitude, omega, phase});
}

ForcingSignal ForcingSignal::power_of_sine(ModalVector profile, double amplitude, double omega, double beta) {
  if (profile.size() < 1) throw ValidationError("empty forcing profile");
  require_finite(amplitude, "amplitude");
  require_omega(omega);
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be >= 0");
  const int n = static_cast<int>(profile.size());
  return ForcingSignal(n, PowerOfSineData{std::move(profile), amplitude, omega, beta});
}

ForcingSignal ForcingSignal::sampled(std::vector<double> times, std::vector<ModalVector> values) {
  if (times.size() < 2) throw ValidationError("sampled forcing needs at least two samples");
  if (times.size() != values.size()) throw ValidationError("sampled forcing: times and values differ in length");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ValidationError("sampled forcing times must be strictly increasing");
  const auto n = values.front().size();
  for (const auto& v : values)
    if (v.size() != n) throw ValidationError("sampled forcing values differ in dimension");
  if (n < 1) throw ValidationError("empty forcing profile");
  return ForcingSignal(static_cast<int>(n), SampledData{std::move(times), std::move(values)});
}

ForcingSignal ForcingSignal::sum(std::vector<ForcingSignal> parts) {
  if (parts.empty()) throw ValidationError("sum forcing needs at least one part");
  const int n = parts.front().dim();
  for (const auto& p : parts)
    if (p.dim() != n) throw ValidationError("sum forcing parts differ in dimension");
  return ForcingSignal(n, SumData{std::move(parts)});
}

ForcingKind ForcingSignal::kind() const {
  return static_cast<ForcingKind>(data_.index());
}

ForcingSignal ForcingSignal::with_antiperiod(double tau) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("anti-period must be positive");
  const auto [t0, t1] = time_range();
  if (t0 > 0.0 || t1 < 2.0 * tau) throw ValidationError("sampled forcing does not cover [0, 2 tau]");
  constexpr int kGrid = 512;
  double worst = 0.0;
  double sup = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double t = tau * i / kGrid;
    const ModalVector a = eval(t);
    sup = std::max(sup, a.norm());
    worst = std::max(worst, (eval(t + tau) + a).norm());
  }
  if (worst >= 1e-9 * (1.0 + sup))
    throw ValidationError("forcing is not anti-periodic with tau = " + std::to_string(tau) +
                          " (defect " + std::to_string(worst) + ")");
  ForcingSignal copy = *this;
  copy.antiperiod_ = tau;
  return copy;
}

ForcingSignal ForcingSignal::scaled(double s) const {
  require_finite(s, "scale");
  ForcingSignal copy = *this;
  std::visit(overloaded{
                 [](ZeroData&) {},
                 [s](ConstantData& d) { d.profile *= s; },
                 [s](SinusoidalData& d) { d.amplitude *= s; },
                 [s](PowerOfSineData& d) { d.amplitude *= s; },
                 [s](SampledData& d) {
                   for (auto& v : d.values) v *= s;
                 },
                 [s](SumData& d) {
                   for (auto& p : d.parts) p = p.scaled(s);
                 },
             },
             copy.data_);
  return copy;
}

ModalVector ForcingSignal::eval(double t) const {
  if (!(t >= 0.0)) throw ValidationError("forcing evaluated at negative time");
  return std::visit(
      overloaded{
          [&](const ZeroData&) -> ModalVector { return ModalVector::Zero(dim_); },
          [&](const ConstantData& d) -> ModalVector { return d.profile; },
          [&](const SinusoidalData& d) -> ModalVector {
            return (d.amplitude * std::sin(d.omega * t + d.phase)) * d.profile;
          },
          [&](const PowerOfSineData& d) -> ModalVector {
            const double s = std::sin(d.omega * t);
            const double mag = s == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(s), d.beta), s);
            return (d.amplitude * mag) * d.profile;
          },
          [&](const SampledData& d) -> ModalVector {
            if (t < d.times.front() || t > d.times.back())
              throw ValidationError("sampled forcing evaluated outside [" + std::to_string(d.times.front()) + ", " +
                                    std::to_string(d.times.back()) + "] at t = " + std::to_string(t));
            auto it = std::upper_bound(d.times.begin(), d.times.end(), t);
            if (it == d.times.end()) return d.values.back();
            const auto i = static_cast<std::size_t>(it - d.times.begin());
            const double w = (t - d.times[i - 1]) / (d.times[i] - d.times[i - 1]);
            return (1.0 - w) * d.values[i - 1] + w * d.values[i];
          },
          [&](const SumData& d) -> ModalVector {
            ModalVector out = ModalVector::Zero(dim_);
            for (const auto& p : d.parts) out += p.eval(t);
            return out;
          },
      },
      data_);
}

bool ForcingSignal::is_constant() const {
  return std::visit(overloaded{
                        [](const ZeroData&) { return true; },
                        [](const ConstantData&) { return true; },
                        [](const SumData& d) {
                          return std::all_of(d.parts.begin(), d.parts.end(),
                                             [](const ForcingSignal& p) { return p.is_constant(); });
                        },
                        [](const auto&) { return false; },
                    },
                    data_);
}

std::optional<double> ForcingSignal::period() const {
  if (antiperiod_) return 2.0 * *antiperiod_;
  return std::visit(
      overloaded{
          [](const SinusoidalData& d) -> std::optional<double> { return 2.0 * std::numbers::pi / d.omega; },
          [](const PowerOfSineData& d) -> std::optional<double> { return 2.0 * std::numbers::pi / d.omega; },
          [](const SumData& d) -> std::optional<double> {
            // Common period when every part's period divides the longest one.
            double longest = 0.0;
            std::vector<double> periods;
            for (const auto& p : d.parts) {
              if (p.is_constant()) continue;
              auto q = p.period();
              if (!q) return std::nullopt;
              periods.push_back(*q);
              longest = std::max(longest, *q);
            }
            if (periods.empty()) return std::nullopt;
            for (double q : periods) {
              const double ratio = longest / q;
              if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) return std::nullopt;
            }
            return longest;
          },
          [](const auto&) -> std::optional<double> { return std::nullopt; },
      },
      data_);
}

double ForcingSignal::max_frequency() const {
  return std::visit(overloaded{
                        [](const SinusoidalData& d) { return d.omega; },
                        [](const PowerOfSineData& d) { return d.omega; },
                        [](const SampledData& d) {
                          double dt_min = d.times.back() - d.times.front();
                          for (std::size_t i = 1; i < d.times.size(); ++i)
                            dt_min = std::min(dt_min, d.times[i] - d.times[i - 1]);
                          return std::numbers::pi / dt_min;
                        },
                        [](const SumData& d) {
                          double w = 0.0;
                          for (const auto& p : d.parts) w = std::max(w, p.max_frequency());
                          return w;
                        },
                        [](const auto&) { return 0.0; },
                    },
                    data_);
}

std::pair<double, double> ForcingSignal::time_range() const {
  return std::visit(overloaded{
                        [](const SampledData& d) { return std::pair{d.times.front(), d.times.back()}; },
                        [](const SumData& d) {
                          std::pair<double, double> r{0.0, INFINITY};
                          for (const auto& p : d.parts) {
                            auto q = p.time_range();
                            r.first = std::max(r.first, q.first);
                            r.second = std::min(r.second, q.second);
                          }
                          return r;
                        },
                        [](const auto&) { return std::pair<double, double>{0.0, INFINITY}; },
                    },
                    data_);
}

namespace {

// Cells per unit time: step <= 1e-3 * min(1, 2 pi / omega).
int cells_per_unit(const ForcingSignal& h) {
  const double omega = h.max_frequency();
  const double step = 1e-3 * std::min(1.0, omega > 0.0 ? 2.0 * std::numbers::pi / omega : 1.0);
  return static_cast<int>(std::ceil(1.0 / step));
}

const ForcingSignal::SinusoidalData* as_sinusoid(const ForcingSignal& h) {
  return std::get_if<ForcingSignal::SinusoidalData>(&h.data());
}

}  // namespace

double s2_norm(const ForcingSignal& h, double horizon) {
  if (!(horizon >= 1.0)) throw ValidationError("S2 norm needs a horizon >= 1");
  if (h.is_constant()) return h.eval(0.0).norm();
  if (const auto* d = as_sinusoid(h)) {
    // sup_t int_t^{t+1} sin^2(omega s + phase) ds = 1/2 + |sin omega| / (2 omega)
    const double window = 0.5 + std::abs(std::sin(d->omega)) / (2.0 * d->omega);
    return std::abs(d->amplitude) * d->profile.norm() * std::sqrt(window);
  }
  const auto [t0, t1] = h.time_range();
  double last_start = std::min(horizon, t1) - 1.0;
  if (auto p = h.period()) last_start = std::min(last_start, t0 + *p);
  if (last_start < t0) throw ValidationError("S2 norm: signal does not cover a unit window");

  const int m = cells_per_unit(h);
  const double delta = 1.0 / m;
  const int num_starts = static_cast<int>(std::floor((last_start - t0) * m + 1e-9)) + 1;
  const int num_cells = num_starts - 1 + m;
  std::vector<double> prefix(num_cells + 1, 0.0);
  for (int i = 0; i < num_cells; ++i) {
    const double t = std::min(t0 + (i + 0.5) * delta, t1);
    prefix[i + 1] = prefix[i] + h.eval(t).squaredNorm() * delta;
  }
  double best = 0.0;
  for (int s = 0; s < num_starts; ++s) best = std::max(best, prefix[s + m] - prefix[s]);
  return std::sqrt(best);
}

double linf_norm(const ForcingSignal& h, double horizon) {
  if (!(horizon > 0.0)) throw ValidationError("L-infinity norm needs a positive horizon");
  if (h.is_constant()) return h.eval(0.0).norm();
  if (const auto* d = as_sinusoid(h)) return std::abs(d->amplitude) * d->profile.norm();
  if (const auto* d = std::get_if<ForcingSignal::PowerOfSineData>(&h.data()))
    return std::abs(d->amplitude) * d->profile.norm();
  if (const auto* d = std::get_if<ForcingSignal::SampledData>(&h.data())) {
    double best = 0.0;
    for (std::size_t i = 0; i < d->times.size(); ++i)
      if (d->times[i] <= horizon) best = std::max(best, d->values[i].norm());
    return best;
  }
  const auto [t0, t1] = h.time_range();
  double end = std::min(horizon, t1);
  if (auto p = h.period()) end = std::min(end, t0 + *p);
  const int m = cells_per_unit(h);
  const int n = std::max(1, static_cast<int>(std::ceil((end - t0) * m)));
  double best = 0.0;
  for (int i = 0; i <= n; ++i) best = std::max(best, h.eval(t0 + (end - t0) * i / n).norm());
  return best;
}

double l2_period_norm(const ForcingSignal& h, double tau) {
  if (!(tau > 0.0)) throw ValidationError("L2 period norm needs tau > 0");
  if (h.is_constant()) return h.eval(0.0).norm() * std::sqrt(tau);
  if (const auto* d = as_sinusoid(h)) {
    const double w = d->omega;
    const double integral =
        0.5 * tau - (std::sin(2.0 * (w * tau + d->phase)) - std::sin(2.0 * d->phase)) / (4.0 * w);
    return std::abs(d->amplitude) * d->profile.norm() * std::sqrt(std::max(integral, 0.0));
  }
  const int n = std::max(2000, static_cast<int>(std::ceil(tau * cells_per_unit(h))));
  const double delta = tau / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += h.eval((i + 0.5) * delta).squaredNorm();
  return std::sqrt(sum * delta);
}

ForcingSignal load_sampled_csv(const std::filesystem::path& path, int num_modes) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open forcing CSV '" + path.string() + "'");
  std::vector<double> times;
  std::vector<ModalVector> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    std::vector<double> row;
    try {
      for (const auto& c : cells) {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
      }
    } catch (const std::exception&) {
      if (times.empty() && line_no == 1) continue;  // header
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (static_cast<int>(row.size()) != num_modes + 1)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(num_modes + 1) + " columns, found " + std::to_string(row.size()));
    times.push_back(row[0]);
    values.push_back(Eigen::Map<const Eigen::VectorXd>(row.data() + 1, num_modes));
  }
  return ForcingSignal::sampled(std::move(times), std::move(values));
}

}  // namespace ubound
