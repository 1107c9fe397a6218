#include "dpmap/moments.hpp"

#include "dpmap/errors.hpp"
#include "moments_internal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dpmap {

const char* to_string(MomentMethod method) {
  switch (method) {
    case MomentMethod::closed_form: return "closed_form";
    case MomentMethod::quadrature: return "quadrature";
    case MomentMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

namespace detail {

McTally::McTally(int d, std::size_t regions, std::vector<double> stratum_weights)
    : d_(d), regions_(regions), weight_(std::move(stratum_weights)) {
  const std::size_t h = weight_.size();
  n_.assign(h, 0.0);
  count_.assign(h * regions_, 0.0);
  sum_.assign(h * regions_ * static_cast<std::size_t>(d_), 0.0);
  outer_.assign(h * regions_ * static_cast<std::size_t>(d_ * d_), 0.0);
}

void McTally::add(std::size_t stratum, std::optional<std::size_t> region, const double* x) {
  n_[stratum] += 1.0;
  ++total_;
  if (!region) return;
  const std::size_t c = cell(stratum, *region);
  count_[c] += 1.0;
  const std::size_t du = static_cast<std::size_t>(d_);
  for (std::size_t k = 0; k < du; ++k) {
    sum_[c * du + k] += x[k];
    for (std::size_t l = 0; l < du; ++l) outer_[(c * du + k) * du + l] += x[k] * x[l];
  }
}

double McTally::p(std::size_t g) const {
  double out = 0.0;
  for (std::size_t h = 0; h < weight_.size(); ++h)
    if (n_[h] > 0) out += weight_[h] * count_[cell(h, g)] / n_[h];
  return out;
}

Eigen::VectorXd McTally::s(std::size_t g) const {
  const std::size_t du = static_cast<std::size_t>(d_);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d_);
  for (std::size_t h = 0; h < weight_.size(); ++h) {
    if (n_[h] == 0) continue;
    for (std::size_t k = 0; k < du; ++k)
      out(static_cast<Eigen::Index>(k)) += weight_[h] * sum_[cell(h, g) * du + k] / n_[h];
  }
  return out;
}

double McTally::influence_se(const std::vector<double>& c, const std::vector<Eigen::VectorXd>& b) const {
  const std::size_t du = static_cast<std::size_t>(d_);
  double var = 0.0;
  for (std::size_t h = 0; h < weight_.size(); ++h) {
    if (n_[h] < 2) continue;
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t g = 0; g < regions_; ++g) {
      const std::size_t cg = cell(h, g);
      double bs = 0.0, bob = 0.0;
      for (std::size_t k = 0; k < du; ++k) {
        const double bk = b[g](static_cast<Eigen::Index>(k));
        bs += bk * sum_[cg * du + k];
        for (std::size_t l = 0; l < du; ++l)
          bob += bk * outer_[(cg * du + k) * du + l] * b[g](static_cast<Eigen::Index>(l));
      }
      s1 += c[g] * count_[cg] + bs;
      s2 += c[g] * c[g] * count_[cg] + 2.0 * c[g] * bs + bob;
    }
    const double v = std::max(0.0, (s2 - s1 * s1 / n_[h]) / (n_[h] - 1.0));
    var += weight_[h] * weight_[h] * v / n_[h];
  }
  return std::sqrt(var);
}

}  // namespace detail

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::size_t kDiscAngularStrata = 16;
constexpr std::size_t kDiscRadialStrata = 4;
constexpr std::size_t kChunk = 1 << 16;

struct Mass {
  double p = 0.0, s = 0.0;
  Mass operator+(const Mass& o) const { return {p + o.p, s + o.s}; }
};

// Adaptive Simpson on the pair (f, x f).
Mass simpson_step(double a, double b, double fa, double fm, double fb) {
  const double m = 0.5 * (a + b), h = (b - a) / 6.0;
  return {h * (fa + 4.0 * fm + fb), h * (a * fa + 4.0 * m * fm + b * fb)};
}

template <class F>
Mass adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb, Mass whole, double tol,
                      int depth) {
  const double m = 0.5 * (a + b);
  const double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
  const Mass left = simpson_step(a, m, fa, flm, fm);
  const Mass right = simpson_step(m, b, fm, frm, fb);
  const Mass both = left + right;
  const double err = std::max(std::abs(both.p - whole.p), std::abs(both.s - whole.s));
  if (depth <= 0 || err <= 15.0 * tol)
    return {both.p + (both.p - whole.p) / 15.0, both.s + (both.s - whole.s) / 15.0};
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
Mass integrate(const F& f, double a, double b, double tol) {
  if (!(b > a)) return {};
  const double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
  return adaptive_simpson(f, a, b, fa, fm, fb, simpson_step(a, b, fa, fm, fb), tol, 50);
}

Mass quadrature_interval(const DistributionSpec& law, const Interval& iv, double tol) {
  return std::visit(
      Overloaded{[&](const UniformSegment& u) {
                   const double dens = 1.0 / (u.b - u.a);
                   return integrate([dens](double) { return dens; }, std::max(u.a, iv.lo), std::min(u.b, iv.hi), tol);
                 },
                 [&](const Exponential& e) {
                   const double l = std::max(iv.lo, 0.0);
                   const double h = std::min(iv.hi, l + 50.0 / e.rate);
                   return integrate([&e](double x) { return e.rate * std::exp(-e.rate * x); }, l, h, tol);
                 },
                 [&](const GaussianMixture& g) {
                   Mass total;
                   for (std::size_t k = 0; k < g.means.size(); ++k) {
                     const double sd = std::sqrt(g.variances[k]);
                     const double w = g.weights[k], mu = g.means[k];
                     auto dens = [w, mu, sd](double x) {
                       const double z = (x - mu) / sd;
                       return w * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
                     };
                     total = total + integrate(dens, std::max(iv.lo, mu - 8.0 * sd), std::min(iv.hi, mu + 8.0 * sd),
                                               tol / static_cast<double>(g.means.size()));
                   }
                   return total;
                 },
                 [](const auto&) -> Mass { throw StructuralError("quadrature: law is not a 1-D density"); }},
      law.variant());
}

bool polygon_in_disc(const ConvexPolygon& poly, double radius) {
  for (const Point2& v : poly.ccw)
    if (v.norm() > radius * (1.0 + 1e-12)) return false;
  return true;
}

void check_region_dim(const DistributionSpec& law, const Region& region) {
  const int rd = region_dim(region);
  if (rd != 0 && rd != law.dim())
    throw StructuralError("region of dimension " + std::to_string(rd) + " under a law on R^" +
                          std::to_string(law.dim()));
}

// Closed form for one region under a continuous law, if there is one.
std::optional<std::pair<double, Eigen::VectorXd>> closed_form(const DistributionSpec& law, const Region& region) {
  if (law.dim() == 1) {
    const auto* iv = std::get_if<Interval>(&region);
    if (!iv) return std::nullopt;
    const auto [p, s] = law.interval_mass(iv->lo, iv->hi, iv->lo_closed, iv->hi_closed);
    return std::pair{p, Eigen::VectorXd::Constant(1, s).eval()};
  }
  const auto* disc = std::get_if<UniformDisc>(&law.variant());
  if (!disc) return std::nullopt;
  const double r = disc->radius;
  if (const auto* sec = std::get_if<Sector>(&region)) {
    const double phi = std::min(sec->theta_hi - sec->theta_lo, 2.0 * std::numbers::pi);
    const double p = phi / (2.0 * std::numbers::pi);
    const double dist = 4.0 * r * std::sin(0.5 * phi) / (3.0 * phi);
    const double mid = sec->theta_lo + 0.5 * phi;
    Eigen::VectorXd s(2);
    s << p * dist * std::cos(mid), p * dist * std::sin(mid);
    return std::pair{p, s};
  }
  if (const auto* poly = std::get_if<ConvexPolygon>(&region)) {
    if (!polygon_in_disc(*poly, r)) return std::nullopt;
    if (poly->ccw.size() < 3) return std::pair{0.0, Eigen::VectorXd::Zero(2).eval()};
    const double p = geom::polygon_area(poly->ccw) / (std::numbers::pi * r * r);
    const Point2 c = geom::polygon_centroid(poly->ccw);
    return std::pair{p, Eigen::VectorXd(p * c)};
  }
  if (const auto* hp = std::get_if<HalfPlanes>(&region); hp && hp->planes.empty())
    return std::pair{1.0, Eigen::VectorXd::Zero(2).eval()};
  return std::nullopt;
}

std::optional<std::size_t> first_region(const std::vector<const Region*>& regions, const Eigen::VectorXd& x) {
  for (std::size_t g = 0; g < regions.size(); ++g)
    if (region_contains(*regions[g], x)) return g;
  return std::nullopt;
}

detail::RawMoments exact_discrete(const DistributionSpec& law, const std::vector<const Region*>& regions) {
  const Eigen::MatrixXd* atoms;
  std::vector<double> probs;
  if (const auto* a = std::get_if<Atomic>(&law.variant())) {
    atoms = &a->atoms;
    probs = a->probabilities;
  } else {
    const auto& e = std::get<Empirical>(law.variant());
    atoms = &e.data.points();
    probs.assign(e.data.size(), 1.0 / static_cast<double>(e.data.size()));
  }
  detail::RawMoments out;
  out.p.assign(regions.size(), 0.0);
  out.s.assign(regions.size(), Eigen::VectorXd::Zero(law.dim()));
  for (Eigen::Index i = 0; i < atoms->rows(); ++i) {
    const Eigen::VectorXd x = atoms->row(i).transpose();
    if (const auto g = first_region(regions, x)) {
      out.p[*g] += probs[static_cast<std::size_t>(i)];
      out.s[*g] += probs[static_cast<std::size_t>(i)] * x;
    }
  }
  return out;
}

detail::RawMoments monte_carlo(const DistributionSpec& law, const std::vector<const Region*>& regions,
                               const MomentOptions& options) {
  if (options.mc_samples < 2) throw ConfigError("monte carlo: need at least two samples");
  Rng rng(options.mc_seed);
  detail::RawMoments out;
  out.method = MomentMethod::monte_carlo;
  Eigen::VectorXd x(law.dim());
  if (const auto* disc = std::get_if<UniformDisc>(&law.variant())) {
    // Equal-area cells: angular sectors times radial rings.
    const std::size_t strata = kDiscAngularStrata * kDiscRadialStrata;
    detail::McTally tally(2, regions.size(), std::vector<double>(strata, 1.0 / static_cast<double>(strata)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t per = std::max<std::size_t>(2, options.mc_samples / strata);
    for (std::size_t a = 0; a < kDiscAngularStrata; ++a) {
      for (std::size_t b = 0; b < kDiscRadialStrata; ++b) {
        const std::size_t h = a * kDiscRadialStrata + b;
        for (std::size_t i = 0; i < per; ++i) {
          const double u = (static_cast<double>(b) + unit(rng)) / static_cast<double>(kDiscRadialStrata);
          const double t = 2.0 * std::numbers::pi * (static_cast<double>(a) + unit(rng)) /
                           static_cast<double>(kDiscAngularStrata);
          const double r = disc->radius * std::sqrt(u);
          x << r * std::cos(t), r * std::sin(t);
          tally.add(h, first_region(regions, x), x.data());
        }
      }
    }
    out.tally = std::move(tally);
  } else {
    detail::McTally tally(law.dim(), regions.size(), {1.0});
    std::size_t left = options.mc_samples;
    while (left > 0) {
      const std::size_t batch = std::min(left, kChunk);
      const Dataset chunk = law.sample(batch, rng);
      for (std::size_t i = 0; i < batch; ++i) {
        x = chunk.point(i);
        tally.add(0, first_region(regions, x), x.data());
      }
      left -= batch;
    }
    out.tally = std::move(tally);
  }
  for (std::size_t g = 0; g < regions.size(); ++g) {
    out.p.push_back(out.tally->p(g));
    out.s.push_back(out.tally->s(g));
  }
  return out;
}

}  // namespace

namespace detail {

RawMoments raw_moments(const DistributionSpec& law, const std::vector<const Region*>& regions,
                       const MomentOptions& options) {
  for (const Region* r : regions) check_region_dim(law, *r);
  if (law.is_discrete()) return exact_discrete(law, regions);

  const bool quad = options.prefer == MomentOptions::Prefer::quadrature && law.dim() == 1;
  if (options.prefer != MomentOptions::Prefer::monte_carlo) {
    RawMoments out;
    out.method = quad ? MomentMethod::quadrature : MomentMethod::closed_form;
    bool all = true;
    for (const Region* r : regions) {
      if (quad) {
        const auto* iv = std::get_if<Interval>(r);
        if (!iv) {
          all = false;
          break;
        }
        const Mass m = quadrature_interval(law, *iv, options.quadrature_tolerance);
        out.p.push_back(m.p);
        out.s.push_back(Eigen::VectorXd::Constant(1, m.s));
        continue;
      }
      auto cf = closed_form(law, *r);
      if (!cf) {
        all = false;
        break;
      }
      out.p.push_back(cf->first);
      out.s.push_back(std::move(cf->second));
    }
    if (all) return out;
  }
  return monte_carlo(law, regions, options);
}

}  // namespace detail

namespace {

std::vector<RegionMoments> finish(const DistributionSpec& law, const detail::RawMoments& raw,
                                  const MomentOptions& options) {
  std::vector<RegionMoments> out;
  const std::size_t k = raw.p.size();
  for (std::size_t g = 0; g < k; ++g) {
    if (!(raw.p[g] >= kDegenerateProbability))
      throw DegenerateRegion("region " + std::to_string(g) + " has probability " + std::to_string(raw.p[g]) +
                             " below 1e-9");
    RegionMoments m;
    m.p = std::min(raw.p[g], 1.0);
    m.mean = raw.s[g] / raw.p[g];
    m.method = raw.method;
    m.se_mean = Eigen::VectorXd::Zero(law.dim());
    if (raw.tally) {
      m.mc_samples = raw.tally->samples();
      m.mc_seed = options.mc_seed;
      std::vector<double> c(k, 0.0);
      std::vector<Eigen::VectorXd> b(k, Eigen::VectorXd::Zero(law.dim()));
      c[g] = 1.0;
      m.se_p = raw.tally->influence_se(c, b);
      for (int j = 0; j < law.dim(); ++j) {
        c[g] = -m.mean(j) / raw.p[g];
        b[g] = Eigen::VectorXd::Unit(law.dim(), j) / raw.p[g];
        m.se_mean(j) = raw.tally->influence_se(c, b);
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

RegionMoments region_moments(const DistributionSpec& law, const Region& region, const MomentOptions& options) {
  const detail::RawMoments raw = detail::raw_moments(law, {&region}, options);
  return finish(law, raw, options).front();
}

std::vector<RegionMoments> partition_moments(const DistributionSpec& law, const SpacePartition& partition,
                                             const MomentOptions& options) {
  partition.validate(law.dim());
  std::vector<const Region*> regions;
  for (const Region& r : partition.regions) regions.push_back(&r);
  return finish(law, detail::raw_moments(law, regions, options), options);
}

ProbabilityEstimate region_probability(const DistributionSpec& law, const Region& region,
                                       const MomentOptions& options) {
  const detail::RawMoments raw = detail::raw_moments(law, {&region}, options);
  ProbabilityEstimate out;
  out.p = std::clamp(raw.p[0], 0.0, 1.0);
  out.method = raw.method;
  if (raw.tally) out.se = raw.tally->influence_se({1.0}, {Eigen::VectorXd::Zero(law.dim())});
  return out;
}

}  // namespace dpmap
