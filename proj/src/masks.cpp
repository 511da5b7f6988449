#include "dynpriv/masks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dynpriv/errors.hpp"

namespace dynpriv {

namespace {

bool uses_gain_constant(MaskFamily f) {
  return f == MaskFamily::Constant || f == MaskFamily::Affine;
}
bool uses_gain_decay(MaskFamily f) {
  return f == MaskFamily::Linear || f == MaskFamily::VanishingAffine;
}
bool uses_offset(MaskFamily f) {
  return f == MaskFamily::Additive || f == MaskFamily::Affine ||
         f == MaskFamily::VanishingAffine;
}

void validate_node(MaskFamily family, const NodeMaskParams& p) {
  auto fail = [&](const std::string& what) {
    throw InvalidParams(std::string(to_string(family)) + " mask at node " +
                        std::to_string(p.node) + ": " + what);
  };
  for (double v : {p.c, p.phi, p.sigma, p.gamma, p.delta}) {
    if (!std::isfinite(v)) fail("non-finite parameter");
  }
  if (uses_gain_constant(family) && !(p.c > 1.0)) fail("requires c > 1");
  if (uses_gain_decay(family)) {
    if (!(p.phi > 0.0)) fail("requires phi > 0");
    if (!(p.sigma > 0.0)) fail("requires sigma > 0");
  }
  if (uses_offset(family)) {
    if (!(p.delta > 0.0)) fail("requires delta > 0");
    if (p.gamma == 0.0) fail("requires gamma != 0");
  }
}

}  // namespace

std::string_view to_string(MaskFamily family) {
  switch (family) {
    case MaskFamily::Identity: return "Identity";
    case MaskFamily::Constant: return "Constant";
    case MaskFamily::Linear: return "Linear";
    case MaskFamily::Additive: return "Additive";
    case MaskFamily::Affine: return "Affine";
    case MaskFamily::VanishingAffine: return "VanishingAffine";
  }
  return "?";
}

MaskFamily parse_mask_family(std::string_view name) {
  for (MaskFamily f : kAllMaskFamilies) {
    if (to_string(f) == name) return f;
  }
  throw InvalidParams("unknown mask family '" + std::string(name) + "'");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::NotAudited: return "not audited";
  }
  return "?";
}

MaskSpec::MaskSpec(MaskFamily family, std::vector<NodeMaskParams> params)
    : family_(family), params_(std::move(params)) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].node != i) {
      throw InvalidParams("parameter entry " + std::to_string(i) + " is tagged with node " +
                          std::to_string(params_[i].node));
    }
    validate_node(family_, params_[i]);
  }
}

MaskSpec MaskSpec::identity(std::size_t n) {
  std::vector<NodeMaskParams> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i].node = i;
  return MaskSpec(MaskFamily::Identity, std::move(p));
}

MaskTerms mask_terms(const MaskSpec& spec, std::size_t node, double t) {
  const NodeMaskParams& p = spec.params(node);
  const MaskFamily f = spec.family();
  MaskTerms m;
  if (uses_gain_constant(f)) {
    m.gain = p.c;
  } else if (uses_gain_decay(f)) {
    const double e = p.phi * std::exp(-p.sigma * t);
    m.gain = 1.0 + e;
    m.gain_rate = -p.sigma * e;
  }
  if (uses_offset(f)) {
    const double e = p.gamma * std::exp(-p.delta * t);
    m.offset = e;
    m.offset_rate = -p.delta * e;
  }
  return m;
}

double eval_mask(const MaskSpec& spec, std::size_t node, double t, double x) {
  const MaskTerms m = mask_terms(spec, node, t);
  return m.gain * (x + m.offset);
}

double invert_mask(const MaskSpec& spec, std::size_t node, double t, double y) {
  const MaskTerms m = mask_terms(spec, node, t);
  return y / m.gain - m.offset;
}

double mask_time_derivative(const MaskSpec& spec, std::size_t node, double t, double x,
                            double xdot) {
  const MaskTerms m = mask_terms(spec, node, t);
  return m.gain_rate * (x + m.offset) + m.gain * (xdot + m.offset_rate);
}

void eval_mask_all(const MaskSpec& spec, double t, std::span<const double> x,
                   std::span<double> y) {
  if (x.size() != spec.size() || y.size() != spec.size()) {
    throw DimensionMismatch("mask has " + std::to_string(spec.size()) +
                            " nodes, state has " + std::to_string(x.size()));
  }
  if (spec.family() == MaskFamily::Identity) {
    std::copy(x.begin(), x.end(), y.begin());
    return;
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = eval_mask(spec, i, t, x[i]);
}

MaskSpec random_mask_spec(MaskFamily family, std::size_t n, std::uint64_t seed,
                          const ParamRanges& ranges) {
  std::mt19937_64 rng(seed);
  auto draw = [&](const std::array<double, 2>& r) {
    return std::uniform_real_distribution<double>(r[0], r[1])(rng);
  };
  std::vector<NodeMaskParams> params(n);
  for (std::size_t i = 0; i < n; ++i) {
    NodeMaskParams p;
    p.node = i;
    // Always draw the full set so that switching family keeps the stream.
    const double c = draw(ranges.c);
    const double phi = draw(ranges.phi);
    const double sigma = draw(ranges.sigma);
    const double gamma_mag = draw(ranges.gamma);
    const bool negative = std::bernoulli_distribution(0.5)(rng);
    const double delta = draw(ranges.delta);
    if (uses_gain_constant(family)) p.c = c;
    if (uses_gain_decay(family)) {
      p.phi = phi;
      p.sigma = sigma;
    }
    if (uses_offset(family)) {
      p.gamma = negative ? -gamma_mag : gamma_mag;
      p.delta = delta;
    }
    params[i] = p;
  }
  return MaskSpec(family, std::move(params));
}

MaskSpec with_uniform_rates(const MaskSpec& spec, std::optional<double> sigma,
                            std::optional<double> delta) {
  std::vector<NodeMaskParams> params(spec.params().begin(), spec.params().end());
  for (auto& p : params) {
    if (sigma && uses_gain_decay(spec.family())) p.sigma = *sigma;
    if (delta && uses_offset(spec.family())) p.delta = *delta;
  }
  return MaskSpec(spec.family(), std::move(params));
}

// ---------------------------------------------------------------------------

bool PropertyReport::all_audited_hold() const {
  return std::none_of(properties.begin(), properties.end(),
                      [](const PropertyVerdict& p) { return p.verdict == Verdict::Fails; });
}

namespace {

constexpr double kStateBox = 10.0;
// P4: radius of the smallest probed ball, and the image size below which the
// ball is considered mapped back onto its centre.
constexpr double kProbeRadius = 1e-9;
constexpr double kCollapsedImage = 1e-6;
constexpr double kVanishedDeviation = 1e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double slowest_rate(const MaskSpec& spec, std::size_t node) {
  const NodeMaskParams& p = spec.params(node);
  double rate = std::numeric_limits<double>::infinity();
  if (uses_gain_decay(spec.family())) rate = std::min(rate, p.sigma);
  if (uses_offset(spec.family())) rate = std::min(rate, p.delta);
  return std::isfinite(rate) ? rate : 1.0;
}

PropertyVerdict audit_p2(const MaskSpec& spec, std::size_t samples, std::mt19937_64& rng) {
  PropertyVerdict v{"P2", Verdict::Holds, std::nullopt, "h(0, x) != x over sampled x"};
  std::uniform_real_distribution<double> xs(-kStateBox, kStateBox);
  std::uniform_int_distribution<std::size_t> nodes(0, spec.size() - 1);
  auto probe = [&](std::size_t node, double x) {
    const double y = eval_mask(spec, node, 0.0, x);
    if (y == x && !v.counterexample) {
      v.verdict = Verdict::Fails;
      v.counterexample = Counterexample{node, 0.0, x, y,
                                        "h(0, " + fmt(x) + ") = " + fmt(y) + " leaves x unmasked"};
    }
  };
  for (std::size_t i = 0; i < spec.size(); ++i) probe(i, 0.0);
  for (std::size_t s = 0; s < samples; ++s) probe(nodes(rng), xs(rng));
  return v;
}

PropertyVerdict audit_p4(const MaskSpec& spec, std::size_t samples, std::mt19937_64& rng) {
  PropertyVerdict v{"P4", Verdict::Holds, std::nullopt,
                    "image of a 1e-9 ball around sampled centres stays >= 1e-6 away"};
  std::uniform_real_distribution<double> xs(-kStateBox, kStateBox);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> nodes(0, spec.size() - 1);
  auto probe = [&](std::size_t node, double centre) {
    double image = std::abs(eval_mask(spec, node, 0.0, centre) - centre);
    for (int k = 0; k < 8; ++k) {
      const double x = centre + unit(rng) * kProbeRadius;
      image = std::max(image, std::abs(eval_mask(spec, node, 0.0, x) - centre));
    }
    if (image < kCollapsedImage && !v.counterexample) {
      v.verdict = Verdict::Fails;
      v.counterexample = Counterexample{
          node, 0.0, centre, image,
          "ball of radius " + fmt(kProbeRadius) + " around x* = " + fmt(centre) +
              " maps within " + fmt(image) + " of x*: neighbourhood preserved"};
    }
  };
  for (std::size_t i = 0; i < spec.size(); ++i) probe(i, 0.0);
  for (std::size_t s = 0; s < samples; ++s) probe(nodes(rng), xs(rng));
  return v;
}

PropertyVerdict audit_p5(const MaskSpec& spec, std::size_t samples, std::mt19937_64& rng) {
  PropertyVerdict v{"P5", Verdict::Holds, std::nullopt,
                    "h strictly increasing in x on sorted samples at sampled t"};
  std::uniform_real_distribution<double> xs(-kStateBox, kStateBox);
  std::uniform_real_distribution<double> ts(0.0, 100.0);
  std::uniform_int_distribution<std::size_t> nodes(0, spec.size() - 1);
  const std::size_t rounds = std::max<std::size_t>(1, samples / 32);
  std::vector<double> grid(32);
  for (std::size_t r = 0; r < rounds && !v.counterexample; ++r) {
    const std::size_t node = nodes(rng);
    const double t = r == 0 ? 0.0 : ts(rng);
    for (auto& x : grid) x = xs(rng);
    std::sort(grid.begin(), grid.end());
    for (std::size_t k = 1; k < grid.size(); ++k) {
      if (grid[k] == grid[k - 1]) continue;
      const double lo = eval_mask(spec, node, t, grid[k - 1]);
      const double hi = eval_mask(spec, node, t, grid[k]);
      if (!(hi > lo)) {
        v.verdict = Verdict::Fails;
        v.counterexample = Counterexample{node, t, grid[k], hi,
                                          "h(t, " + fmt(grid[k]) + ") <= h(t, " +
                                              fmt(grid[k - 1]) + ") at t = " + fmt(t)};
        break;
      }
    }
  }
  return v;
}

PropertyVerdict audit_p6(const MaskSpec& spec, std::size_t samples, std::mt19937_64& rng) {
  PropertyVerdict v{"P6", Verdict::Holds, std::nullopt,
                    "sup_{|x|<=10} |h(t,x) - x| nonincreasing on a geometric t grid and "
                    "< 1e-9 at t = 50 / slowest rate"};
  std::uniform_real_distribution<double> xs(-kStateBox, kStateBox);
  std::vector<double> probes(std::max<std::size_t>(8, samples / spec.size()));
  probes[0] = -kStateBox;
  probes[1] = kStateBox;
  probes[2] = 0.0;
  for (std::size_t k = 3; k < probes.size(); ++k) probes[k] = xs(rng);

  // Rounding slack for comparing deviations near zero.
  const double slack = 16.0 * std::numeric_limits<double>::epsilon() * kStateBox;

  for (std::size_t node = 0; node < spec.size() && !v.counterexample; ++node) {
    const double t_final = 50.0 / slowest_rate(spec, node);
    std::vector<double> times{0.0};
    for (int k = 20; k >= 0; --k) times.push_back(std::ldexp(t_final, -k));

    double previous = std::numeric_limits<double>::infinity();
    for (double t : times) {
      double sup = 0.0;
      double arg = 0.0;
      for (double x : probes) {
        const double d = std::abs(eval_mask(spec, node, t, x) - x);
        if (d > sup) {
          sup = d;
          arg = x;
        }
      }
      if (sup > previous + slack) {
        v.verdict = Verdict::Fails;
        v.counterexample = Counterexample{node, t, arg, sup,
                                          "sup deviation grew to " + fmt(sup) + " at t = " +
                                              fmt(t) + " (was " + fmt(previous) + ")"};
        break;
      }
      previous = sup;
      if (t == t_final && sup >= kVanishedDeviation) {
        v.verdict = Verdict::Fails;
        v.counterexample = Counterexample{
            node, t, arg, sup,
            "|h(t, " + fmt(arg) + ") - x| = " + fmt(sup) + " at t = " + fmt(t) +
                ": mask does not vanish"};
      }
    }
  }
  return v;
}

}  // namespace

PropertyReport audit_properties(const MaskSpec& spec, std::size_t sample_count,
                                std::uint64_t seed) {
  if (sample_count < 100) {
    throw std::invalid_argument("audit_properties needs at least 100 samples");
  }
  if (spec.size() == 0) throw InvalidParams("cannot audit an empty mask spec");

  std::mt19937_64 rng(seed);
  PropertyReport report;
  report.family = spec.family();
  report.sample_count = sample_count;
  report.properties[0] = {"P1", Verdict::Holds, std::nullopt,
                          "structural: h_i reads only (t, x_i, params_i)"};
  report.properties[1] = audit_p2(spec, sample_count, rng);
  report.properties[2] = {"P3", Verdict::NotAudited, std::nullopt,
                          "indiscernibility is assessed by the attack suite"};
  report.properties[3] = audit_p4(spec, sample_count, rng);
  report.properties[4] = audit_p5(spec, sample_count, rng);
  report.properties[5] = audit_p6(spec, sample_count, rng);
  return report;
}

}  // namespace dynpriv
