#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "ubound/spectral_model.hpp"

namespace ubound {

enum class ForcingKind { Zero, ConstantModal, Sinusoidal, PowerOfSine, Sampled, Sum };

std::string_view to_string(ForcingKind kind);

/// H-valued source term h(t) with a modal profile.
///
///   Sinusoidal   amplitude * sin(omega t + phase) * profile
///   PowerOfSine  amplitude * |sin(omega t)|^beta * sign(sin(omega t)) * profile
///   Sampled      piecewise-linear interpolation of (t_i, h_i)
///   Sum          pointwise sum of the parts
///
/// A declared anti-period tau (h(t + tau) = -h(t)) is checked on construction.
class ForcingSignal {
 public:
  static ForcingSignal zero(int dim);
  static ForcingSignal constant(ModalVector profile);
  static ForcingSignal sinusoidal(ModalVector profile, double amplitude, double omega, double phase = 0.0);
  static ForcingSignal power_of_sine(ModalVector profile, double amplitude, double omega, double beta);
  static ForcingSignal sampled(std::vector<double> times, std::vector<ModalVector> values);
  static ForcingSignal sum(std::vector<ForcingSignal> parts);

  // Copy with a verified anti-period; throws ValidationError if h(t+tau) != -h(t).
  ForcingSignal with_antiperiod(double tau) const;
  // Copy with every amplitude (or sample) multiplied by s.
  ForcingSignal scaled(double s) const;

  ModalVector eval(double t) const;

  ForcingKind kind() const;
  int dim() const { return dim_; }
  std::optional<double> antiperiod() const { return antiperiod_; }
  // Smallest known period, if the signal is periodic; constant signals report nullopt
  // and is_constant() instead.
  std::optional<double> period() const;
  bool is_constant() const;
  // Largest angular frequency present, used to size quadrature grids.
  double max_frequency() const;
  // Time range of Sampled data; [0, inf) otherwise.
  std::pair<double, double> time_range() const;

  struct ZeroData {};
  struct ConstantData {
    ModalVector profile;
  };
  struct SinusoidalData {
    ModalVector profile;
    double amplitude;
    double omega;
    double phase;
  };
  struct PowerOfSineData {
    ModalVector profile;
    double amplitude;
    double omega;
    double beta;
  };
  struct SampledData {
    std::vector<double> times;
    std::vector<ModalVector> values;
  };
  struct SumData {
    std::vector<ForcingSignal> parts;
  };
  using Data = std::variant<ZeroData, ConstantData, SinusoidalData, PowerOfSineData, SampledData, SumData>;

  const Data& data() const { return data_; }

 private:
  ForcingSignal(int dim, Data data) : dim_(dim), data_(std::move(data)) {}

  int dim_;
  Data data_;
  std::optional<double> antiperiod_;
};

// {sup_t int_t^{t+1} |h(s)|^2 ds}^{1/2}, sup over window starts in [0, horizon - 1]
// (one period suffices for periodic signals).
double s2_norm(const ForcingSignal& h, double horizon);
// sup_{0 <= t <= horizon} |h(t)|_H.
double linf_norm(const ForcingSignal& h, double horizon);
// {int_0^tau |h(s)|^2 ds}^{1/2}.
double l2_period_norm(const ForcingSignal& h, double tau);

// Reads a Sampled signal from CSV with columns t, coeff_1..coeff_N. A header row is optional.
ForcingSignal load_sampled_csv(const std::filesystem::path& path, int num_modes);

}  // namespace ubound
