#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dynpriv {

enum class MaskFamily { Identity, Constant, Linear, Additive, Affine, VanishingAffine };

inline constexpr std::array<MaskFamily, 6> kAllMaskFamilies = {
    MaskFamily::Identity, MaskFamily::Constant, MaskFamily::Linear,
    MaskFamily::Additive, MaskFamily::Affine,   MaskFamily::VanishingAffine};

std::string_view to_string(MaskFamily family);
// Throws InvalidParams on an unknown name.
MaskFamily parse_mask_family(std::string_view name);

// Private parameters of one agent's mask. Each family reads a subset:
//   Constant        c
//   Linear          phi, sigma
//   Additive        gamma, delta
//   Affine          c, gamma, delta
//   VanishingAffine phi, sigma, gamma, delta
struct NodeMaskParams {
  std::size_t node = 0;
  double c = 1.0;
  double phi = 0.0;
  double sigma = 1.0;
  double gamma = 0.0;
  double delta = 1.0;

  friend bool operator==(const NodeMaskParams&, const NodeMaskParams&) = default;
};

class MaskSpec {
 public:
  MaskSpec() = default;
  // Throws InvalidParams naming the first node whose parameters violate the
  // family's constraints.
  MaskSpec(MaskFamily family, std::vector<NodeMaskParams> params);

  static MaskSpec identity(std::size_t n);

  MaskFamily family() const noexcept { return family_; }
  std::span<const NodeMaskParams> params() const noexcept { return params_; }
  const NodeMaskParams& params(std::size_t node) const { return params_.at(node); }
  std::size_t size() const noexcept { return params_.size(); }

  friend bool operator==(const MaskSpec&, const MaskSpec&) = default;

 private:
  MaskFamily family_ = MaskFamily::Identity;
  std::vector<NodeMaskParams> params_;
};

// Every family factors as h(t, x) = gain(t) * (x + offset(t)).
struct MaskTerms {
  double gain = 1.0;
  double gain_rate = 0.0;    // d gain / dt
  double offset = 0.0;
  double offset_rate = 0.0;  // d offset / dt
};

MaskTerms mask_terms(const MaskSpec& spec, std::size_t node, double t);

double eval_mask(const MaskSpec& spec, std::size_t node, double t, double x);
double invert_mask(const MaskSpec& spec, std::size_t node, double t, double y);
// Total derivative d/dt h(t, x(t)) given x'(t).
double mask_time_derivative(const MaskSpec& spec, std::size_t node, double t, double x,
                            double xdot);

// y_i = h_i(t, x_i) for every node.
void eval_mask_all(const MaskSpec& spec, double t, std::span<const double> x,
                   std::span<double> y);

// Sampling ranges for random mask parameters. Magnitudes are drawn uniformly
// from [lo, hi]; gamma additionally gets a random sign.
struct ParamRanges {
  std::array<double, 2> c{1.1, 5.0};
  std::array<double, 2> phi{0.5, 5.0};
  std::array<double, 2> sigma{0.1, 2.0};
  std::array<double, 2> gamma{0.5, 5.0};
  std::array<double, 2> delta{0.1, 2.0};
};

MaskSpec random_mask_spec(MaskFamily family, std::size_t n, std::uint64_t seed,
                          const ParamRanges& ranges = {});

// Same spec with every node's sigma and delta replaced (families that do not
// use a rate ignore it).
MaskSpec with_uniform_rates(const MaskSpec& spec, std::optional<double> sigma,
                            std::optional<double> delta);

// ---------------------------------------------------------------------------
// Property audit

enum class Verdict { Holds, Fails, NotAudited };

std::string_view to_string(Verdict v);

struct Counterexample {
  std::size_t node = 0;
  double t = 0.0;
  double x = 0.0;
  double value = 0.0;
  std::string detail;
};

struct PropertyVerdict {
  std::string name;  // "P1" .. "P6"
  Verdict verdict = Verdict::NotAudited;
  std::optional<Counterexample> counterexample;
  std::string note;
};

struct PropertyReport {
  MaskFamily family = MaskFamily::Identity;
  std::size_t sample_count = 0;
  std::array<PropertyVerdict, 6> properties;

  const PropertyVerdict& operator[](int p) const { return properties.at(p - 1); }
  // True when no audited property failed.
  bool all_audited_hold() const;
};

// Empirical audit of the mask properties over the spec's own node
// parameters and sampled states:
//   P1 locality          structural, always holds
//   P2 h(0, x) != x      sampled x, x = 0 always included
//   P3 indiscernibility  not audited here (see the adversary module)
//   P4 escapes nbhds     image of a shrinking ball around sampled centres
//   P5 monotone in x     sorted samples at sampled t
//   P6 vanishing         sup over |x| <= 10 of |h - x| on a growing t grid
// Every failure carries one concrete counterexample. Throws
// std::invalid_argument when sample_count < 100.
PropertyReport audit_properties(const MaskSpec& spec, std::size_t sample_count,
                                std::uint64_t seed);

}  // namespace dynpriv
