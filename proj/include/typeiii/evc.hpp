#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "typeiii/montecarlo.hpp"

namespace typeiii {

// ---------------------------------------------------------------------------
// Property * and C_t
// ---------------------------------------------------------------------------

/// The integer p with p / 2^{k_t} = target, i.e. e^{target} = lambda_t^p.
inline BigInt find_p(const ParameterLedger& L, int t, const Rational& target) {
  const LevelParams& lv = L.level(t);
  Rational scaled = target * Rational(pow2(static_cast<std::uint64_t>(lv.k)));
  scaled.canonicalize();
  if (scaled.get_den() != 1)
    fail(ErrorKind::NotLambdaPower, to_string(target) + " is not a multiple of 1/2^" + std::to_string(lv.k));
  BigInt p = scaled.get_num();
  if (BigInt(4 * abs(p)) >= lv.n) {
    Rational quarter(lv.n, 4);
    quarter.canonicalize();
    fail(ErrorKind::PropertyStarRange,
         "|p| = " + to_decimal(abs(p)) + " but n_" + std::to_string(t) + "/4 = " + to_string(quarter));
  }
  return p;
}

struct GoodCylinder {
  Cylinder c;
  int t = 1;
  std::int64_t upsilonT = 0;
};

struct CtMembership {
  bool member = false;
  std::int64_t upsilonT = 0;
};

/// Upsilon_t(c) and whether it lies in [n_t/4, 3n_t/4]. c must sit exactly on (-N_t, 0].
inline CtMembership in_C_t(const ParameterLedger& L, const Cylinder& c, int t) {
  const LevelParams& lv = L.level(t);
  if (c.empty() || c.lo() != BigInt(1 - lv.N) || c.hi() != 0)
    fail(ErrorKind::CylinderShape, "C_" + std::to_string(t) + " needs a cylinder on [" + to_decimal(BigInt(1 - lv.N)) +
                                       ", 0], got " + c.range_string());
  CtMembership m;
  m.upsilonT = upsilon(L, c, t);
  BigInt u4 = 4 * BigInt(static_cast<long>(m.upsilonT));
  m.member = u4 >= lv.n && u4 <= 3 * lv.n;
  return m;
}

inline GoodCylinder make_good_cylinder(const ParameterLedger& L, const Cylinder& c, int t) {
  CtMembership m = in_C_t(L, c, t);
  if (!m.member)
    fail(ErrorKind::InvalidArgument, "Upsilon_" + std::to_string(t) + "(c) = " + std::to_string(m.upsilonT) +
                                         " is outside [n_t/4, 3n_t/4]");
  return {c, t, m.upsilonT};
}

// ---------------------------------------------------------------------------
// D cylinders
// ---------------------------------------------------------------------------

struct DCylinder {
  Cylinder d;  // on ((l-1) N_t, l N_t]
  BigInt l;
  int t = 2;
  int t0 = 1;
  BigInt pExponent;
  std::int64_t ones = 0;  // Upsilon_t(c) + p
};

/// log lambda_{t0} + log f_{t-1}(c).
inline Rational d_target(const ParameterLedger& L, const Cylinder& c, int t, int t0) {
  Rational target = L.level(t0).log_lambda();
  for (int u = 1; u < t; ++u) {
    Rational x(BigInt(static_cast<long>(upsilon(L, c, u))), pow2(static_cast<std::uint64_t>(L.level(u).k)));
    x.canonicalize();
    target += x;
  }
  return target;
}

inline DCylinder build_D(const ParameterLedger& L, const GoodCylinder& gc, int t0, const BigInt& l) {
  const int t = gc.t;
  if (t0 < 1 || t0 >= t) fail(ErrorKind::InvalidArgument, "build_D needs 1 <= t0 < t");
  const LevelParams& lv = L.level(t);
  if (!lv.m.is_inline()) fail(ErrorKind::Representability, "m_" + std::to_string(t) + " is not materializable");
  const BigInt blocks = lv.m.inline_value() / lv.N;
  if (l < 2 || l > blocks)
    fail(ErrorKind::InvalidArgument, "l must be in [2, " + to_decimal(blocks) + "], got " + to_decimal(l));
  CtMembership m = in_C_t(L, gc.c, t);
  if (!m.member || m.upsilonT != gc.upsilonT) fail(ErrorKind::InvalidArgument, "c is not in C_" + std::to_string(t));

  DCylinder D;
  D.l = l;
  D.t = t;
  D.t0 = t0;
  D.pExponent = find_p(L, t, d_target(L, gc.c, t, t0));
  BigInt ones = BigInt(static_cast<long>(gc.upsilonT)) + D.pExponent;
  if (ones < 0 || ones > lv.n)
    fail(ErrorKind::CountOutOfRange, "Upsilon_t(c) + p = " + to_decimal(ones) + " outside [0, " + to_decimal(lv.n) + "]");
  D.ones = to_int64(ones);
  D.d = Cylinder::zeros((l - 1) * lv.N + 1, l * lv.N);
  std::fill_n(D.d.bits().begin(), static_cast<std::ptrdiff_t>(D.ones), std::uint8_t{1});
  return D;
}

/// Recomputes f_t on D seen through T^{l N_t} and checks, at the exponent level,
/// f_t(T^{l N_t} w) = lambda_{t0} f_t(c) for every w in D.
inline bool verify_D(const ParameterLedger& L, const DCylinder& D, const Cylinder& c) {
  const LevelParams& lv = L.level(D.t);
  Cylinder seen = D.d.shifted_by(D.l * lv.N);
  ExponentVector fd = f_exponents(L, seen, D.t);
  ExponentVector fc = f_exponents(L, c, D.t);
  for (int u = 1; u < D.t; ++u)
    if (fd.e[static_cast<std::size_t>(u - 1)] != 0) return false;
  BigInt lhs = fd.scaled_numerator();
  BigInt rhs = fc.scaled_numerator() + shift_left(BigInt(1), static_cast<std::uint64_t>(lv.k - L.level(D.t0).k));
  return lhs == rhs;
}

// ---------------------------------------------------------------------------
// EVC experiment
// ---------------------------------------------------------------------------

struct EvcRow {
  BigInt l;
  Enclosure hitProb;
  bool exact = true;
};

struct ExperimentReport {
  int tau = 2;
  int t0 = 1;
  Rational eps;
  std::string B;
  BigInt blocks;               // m_tau / N_tau
  std::string method;          // "exact" or "montecarlo"
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<EvcRow> rows;    // l = 1..blocks; l = 1 is not used in comparisons
  Enclosure unionProb;         // P(B and some l >= 2 hits)
  Enclosure pB;
  Enclosure blockHit;          // P(E_l) / P(B) for l >= 2
  Enclosure prediction;        // independence prediction as a mass, per stratum of c
  Enclosure pooledPrediction;  // P(B)(1 - (1 - h)^{L-1}) with h pooled over strata
  Enclosure paperBound;        // 1 - (1 - 2^{-2N_tau})^{L-2}
  bool meetsPrediction = false;
  bool predictionAbove09 = false;
  bool unionAbove09 = false;
  bool pass = false;
};

struct EvcOptions {
  enum class Method { Auto, Exact, MonteCarlo };
  Method method = Method::Auto;
  std::uint64_t trials = 4000;
  std::uint64_t seed = 0;
};

namespace detail {

inline Enclosure pow_enclosure(Enclosure base, BigInt e) {
  Enclosure r = Enclosure::from_int(1);
  while (e > 0) {
    if (mpz_odd_p(e.get_mpz_t())) r = r * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return r;
}

inline Enclosure one_minus(const Enclosure& x) { return Enclosure::from_int(1) - x; }

/// Clamp into [0, 1]; probabilities computed by subtraction can leak outside.
inline Enclosure clamp01(Enclosure x) {
  Real one(x.hi().precision());
  mpfr_set_ui(one.get(), 1, MPFR_RNDN);
  if (mpfr_sgn(x.lo().get()) < 0) mpfr_set_zero(x.lo().get(), 1);
  if (mpfr_greater_p(x.hi().get(), one.get())) mpfr_set_ui(x.hi().get(), 1, MPFR_RNDU);
  return x;
}

inline std::string evc_infeasible(const ParameterLedger& L, int tau) {
  const LevelParams& lv = L.level(tau);
  std::string count = lv.m.is_inline() ? to_decimal(lv.m.inline_value() / lv.N)
                                       : "(" + lv.m.to_string() + ")/" + to_decimal(lv.N);
  return "m_" + std::to_string(tau) + " astronomically large; the experiment needs m_" + std::to_string(tau) + "/N_" +
         std::to_string(tau) + " = " + count + " blocks";
}

/// Level windows as offsets inside a block of length N_tau: level u occupies
/// [N_tau - N_u + 1, N_tau - M_{u-1}] (1-based). Coordinate k of (-N_tau, 0]
/// maps to k + N_tau.
struct WindowLayout {
  std::vector<std::int64_t> first, last, scale;  // per level u = 1..tau
  std::int64_t N = 0;
  std::int64_t maxScaled = 0;

  WindowLayout(const ParameterLedger& L, int tau) {
    const LevelParams& top = L.level(tau);
    N = to_int64(top.N);
    for (int u = 1; u <= tau; ++u) {
      BiasedBlock b = biased_block(L, u);
      first.push_back(to_int64(b.first) + N);
      last.push_back(to_int64(b.last) + N);
      std::int64_t s = top.k - L.level(u).k;
      if (s < 0 || s > 40) fail(ErrorKind::NonIncreasingK, "k_u must not decrease");
      scale.push_back(std::int64_t{1} << s);
      maxScaled += (last.back() - first.back() + 1) * scale.back();
    }
  }

  int level_of(std::int64_t j) const {
    for (std::size_t u = 0; u < first.size(); ++u)
      if (j >= first[u] && j <= last[u]) return static_cast<int>(u + 1);
    return 0;
  }
};

/// Fixed bits inside a block, as (offset, bit).
using Pins = std::vector<std::pair<std::int64_t, std::uint8_t>>;

/// Number of block configurations (all coordinates fair) agreeing with `pins`,
/// indexed by the scaled value sum_u s_u Upsilon_u.
inline std::vector<BigInt> block_counts(const WindowLayout& W, const Pins& pins) {
  const std::size_t U = W.first.size();
  std::vector<std::int64_t> fixedOnes(U, 0), freeCount(U, 0);
  for (std::size_t u = 0; u < U; ++u) freeCount[u] = W.last[u] - W.first[u] + 1;
  std::int64_t freeOutside = W.N;
  for (std::size_t u = 0; u < U; ++u) freeOutside -= freeCount[u];
  for (auto [j, bit] : pins) {
    int u = W.level_of(j);
    if (u == 0) {
      --freeOutside;
    } else {
      --freeCount[static_cast<std::size_t>(u - 1)];
      fixedOnes[static_cast<std::size_t>(u - 1)] += bit;
    }
  }
  std::vector<BigInt> dist(static_cast<std::size_t>(W.maxScaled + 1), BigInt(0));
  std::int64_t base = 0;
  for (std::size_t u = 0; u < U; ++u) base += fixedOnes[u] * W.scale[u];
  dist[static_cast<std::size_t>(base)] = 1;
  for (std::size_t u = 0; u < U; ++u) {
    std::vector<BigInt> next(dist.size(), BigInt(0));
    std::vector<BigInt> binom(static_cast<std::size_t>(freeCount[u] + 1));
    for (std::int64_t i = 0; i <= freeCount[u]; ++i)
      mpz_bin_uiui(binom[static_cast<std::size_t>(i)].get_mpz_t(), static_cast<unsigned long>(freeCount[u]),
                   static_cast<unsigned long>(i));
    for (std::size_t v = 0; v < dist.size(); ++v) {
      if (dist[v] == 0) continue;
      for (std::int64_t i = 0; i <= freeCount[u]; ++i) {
        std::size_t to = v + static_cast<std::size_t>(i * W.scale[u]);
        if (to < next.size()) next[to] += dist[v] * binom[static_cast<std::size_t>(i)];
      }
    }
    dist = std::move(next);
  }
  BigInt outside = pow2(static_cast<std::uint64_t>(freeOutside));
  for (auto& d : dist) d *= outside;
  return dist;
}

/// Law of the scaled f_tau on (-N_tau, 0] jointly with the pins: entry v is
/// P(pins hold and sum_u s_u Upsilon_u = v).
inline std::vector<Enclosure> past_distribution(const ParameterLedger& L, const WindowLayout& W, const Pins& pins) {
  const std::size_t U = W.first.size();
  std::vector<std::int64_t> fixedOnes(U, 0), freeCount(U, 0);
  for (std::size_t u = 0; u < U; ++u) freeCount[u] = W.last[u] - W.first[u] + 1;
  Enclosure pinned = Enclosure::from_int(1);
  for (auto [j, bit] : pins) {
    int u = W.level_of(j);
    pinned = pinned * marginal_prob(L, marginal(L, BigInt(static_cast<long>(j - W.N))), bit);
    if (u != 0) {
      --freeCount[static_cast<std::size_t>(u - 1)];
      fixedOnes[static_cast<std::size_t>(u - 1)] += bit;
    }
  }
  std::vector<Enclosure> dist(static_cast<std::size_t>(W.maxScaled + 1));
  std::vector<bool> live(dist.size(), false);
  std::int64_t base = 0;
  for (std::size_t u = 0; u < U; ++u) base += fixedOnes[u] * W.scale[u];
  dist[static_cast<std::size_t>(base)] = pinned;
  live[static_cast<std::size_t>(base)] = true;
  for (std::size_t u = 0; u < U; ++u) {
    const int level = static_cast<int>(u + 1);
    Enclosure p1 = marginal_prob(L, {level, true}, 1), p0 = marginal_prob(L, {level, true}, 0);
    const std::int64_t g = freeCount[u];
    std::vector<Enclosure> pmf(static_cast<std::size_t>(g + 1));
    for (std::int64_t i = 0; i <= g; ++i) {
      BigInt b;
      mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(g), static_cast<unsigned long>(i));
      pmf[static_cast<std::size_t>(i)] = Enclosure::from_bigint(b) * pow_enclosure(p1, BigInt(static_cast<long>(i))) *
                                         pow_enclosure(p0, BigInt(static_cast<long>(g - i)));
    }
    std::vector<Enclosure> next(dist.size());
    std::vector<bool> nlive(dist.size(), false);
    for (std::size_t v = 0; v < dist.size(); ++v) {
      if (!live[v]) continue;
      for (std::int64_t i = 0; i <= g; ++i) {
        std::size_t to = v + static_cast<std::size_t>(i * W.scale[u]);
        if (to >= next.size()) continue;
        next[to] = next[to] + dist[v] * pmf[static_cast<std::size_t>(i)];
        nlive[to] = true;
      }
    }
    dist = std::move(next);
    live = std::move(nlive);
  }
  return dist;
}

inline Enclosure paper_bound(const BigInt& N, const BigInt& blocks) {
  Enclosure q = one_minus(Enclosure::dyadic(1, to_int64(2 * N)));
  return one_minus(pow_enclosure(q, blocks - 2));
}

inline void finish_report(ExperimentReport& r) {
  Enclosure nine = Enclosure::from_rational(Rational(9, 10)) * r.pB;
  r.meetsPrediction = mpfr_greaterequal_p(r.unionProb.hi().get(), r.prediction.lo().get());
  r.predictionAbove09 = mpfr_greaterequal_p(r.prediction.lo().get(), nine.hi().get());
  r.unionAbove09 = mpfr_greaterequal_p(r.unionProb.lo().get(), nine.hi().get());
  r.pass = r.meetsPrediction && (!r.predictionAbove09 || r.unionAbove09);
}

}  // namespace detail

/// Exact-path thresholds on the scaled offset j = F_block - F_c - x_{t0}:
/// |j| <= hit is a sure hit, |j| >= miss a sure miss, anything between is undecided.
struct EvcBands {
  Rational slack;  // h bound for level tau+1 plus the tail after it
  std::optional<BigInt> hit;
  BigInt miss;
};

inline EvcBands evc_bands(const ParameterLedger& L, int tau, const BigInt& blocks, const Rational& eps) {
  const LevelParams& lv = L.level(tau);
  EvcBands b;
  b.slack = L.tail_after(tau + 1);
  const LevelParams& nx = L.level(tau + 1);
  BigInt reach = std::min(BigInt(blocks * lv.N), nx.n);
  Rational h(reach, pow2(static_cast<std::uint64_t>(nx.k)));
  h.canonicalize();
  b.slack += h;
  Rational scale(pow2(static_cast<std::uint64_t>(lv.k)));
  Rational in = (eps - b.slack) * scale;  // |j| <= in
  if (in >= 0) {
    BigInt f = in.get_num() / in.get_den();
    b.hit = f;
  }
  Rational out = (eps + b.slack) * scale;  // |j| > out
  b.miss = out.get_num() / out.get_den() + 1;
  return b;
}

inline ExperimentReport evc_experiment(const ParameterLedger& L, const Cylinder& B, int t0, const Rational& eps, int tau,
                                       const EvcOptions& opt = {}) {
  if (L.mode == LedgerMode::Paper) fail(ErrorKind::Infeasible, detail::evc_infeasible(L, tau));
  if (t0 < 1 || tau <= t0) fail(ErrorKind::InvalidArgument, "evc_experiment needs 1 <= t0 < tau");
  if (eps < 0) fail(ErrorKind::InvalidArgument, "eps must be >= 0");
  if (tau + 1 > L.t_max())
    throw LedgerExhausted(tau + 1, "the derivative at l N_" + std::to_string(tau) + " needs level " +
                                       std::to_string(tau + 1));
  const LevelParams& lv = L.level(tau);
  if (!lv.m.is_inline()) fail(ErrorKind::Infeasible, detail::evc_infeasible(L, tau));
  const BigInt blocks = lv.m.inline_value() / lv.N;
  if (blocks < 3) fail(ErrorKind::InvalidArgument, "m_tau/N_tau must be >= 3, got " + to_decimal(blocks));
  if (blocks > BigInt(1L << 22)) fail(ErrorKind::Infeasible, to_decimal(blocks) + " blocks is beyond desk scale");
  std::optional<BigInt> radius = centered_radius(B);
  if (radius && 2 * *radius >= lv.N)
    fail(ErrorKind::InvalidArgument, "B needs 2r < N_tau, got r = " + to_decimal(*radius));

  ExperimentReport rep;
  rep.tau = tau;
  rep.t0 = t0;
  rep.eps = eps;
  rep.B = B.to_string();
  rep.blocks = blocks;
  rep.paperBound = detail::paper_bound(lv.N, blocks);
  const std::int64_t N = to_int64(lv.N);
  const std::int64_t r = radius ? to_int64(*radius) : -1;

  detail::WindowLayout W(L, tau);
  // Past pins: B on [-r, 0] as offsets in (-N, 0]. Block pins: prefix b_1..b_r and
  // suffix b_{-r}..b_0 at offsets N-r..N.
  detail::Pins past, prefix, suffix;
  for (std::int64_t i = -r; i <= r && r >= 0; ++i) {
    std::uint8_t bit = B.at(BigInt(static_cast<long>(i)));
    if (i <= 0) {
      past.emplace_back(N + i, bit);
      suffix.emplace_back(N + i, bit);
    } else {
      prefix.emplace_back(i, bit);
    }
  }
  Rational prefixProb(1, pow2(static_cast<std::uint64_t>(prefix.size())));
  const BigInt x0 = shift_left(BigInt(1), static_cast<std::uint64_t>(lv.k - L.level(t0).k));
  EvcBands bands = evc_bands(L, tau, blocks, eps);

  bool exactOk = opt.method != EvcOptions::Method::MonteCarlo && W.maxScaled <= (1 << 12);
  std::vector<Enclosure> pastDist;
  std::vector<BigInt> cntS, cntPS;
  if (exactOk) {
    pastDist = detail::past_distribution(L, W, past);
    cntS = detail::block_counts(W, suffix);
    detail::Pins both = prefix;
    both.insert(both.end(), suffix.begin(), suffix.end());
    cntPS = detail::block_counts(W, both);
    // Exact only when every reachable offset is decided.
    for (std::size_t f = 0; f < pastDist.size() && exactOk; ++f) {
      if (mpfr_zero_p(pastDist[f].hi().get())) continue;
      for (std::size_t v = 0; v < cntS.size(); ++v) {
        if (cntS[v] == 0) continue;
        BigInt j = abs(BigInt(static_cast<long>(v)) - static_cast<long>(f) - x0);
        bool hit = bands.hit && j <= *bands.hit;
        if (!hit && j < bands.miss) {
          exactOk = false;
          break;
        }
      }
    }
    if (!exactOk && opt.method == EvcOptions::Method::Exact)
      fail(ErrorKind::Infeasible, "some derivative values straddle the band edge; exact evaluation is not possible");
  } else if (opt.method == EvcOptions::Method::Exact) {
    fail(ErrorKind::Infeasible, "scaled f_tau range " + std::to_string(W.maxScaled) + " is too large for exact evaluation");
  }

  if (exactOk) {
    rep.method = "exact";
    const BigInt denom = pow2(static_cast<std::uint64_t>(N));
    Enclosure pY = Enclosure::from_rational(prefixProb);
    Enclosure pastMass = Enclosure::exact_zero();
    Enclosure unionMass = Enclosure::exact_zero(), predMass = Enclosure::exact_zero();
    Enclosure blockMass = Enclosure::exact_zero(), firstMass = Enclosure::exact_zero();
    const BigInt steps = blocks - 1;
    for (std::size_t f = 0; f < pastDist.size(); ++f) {
      if (mpfr_zero_p(pastDist[f].hi().get())) continue;
      const Enclosure& pf = pastDist[f];
      pastMass = pastMass + pf;
      BigInt sumS = 0, sumPS = 0;
      for (std::size_t v = 0; v < cntS.size(); ++v) {
        BigInt j = abs(BigInt(static_cast<long>(v)) - static_cast<long>(f) - x0);
        if (bands.hit && j <= *bands.hit) {
          sumS += cntS[v];
          sumPS += cntPS[v];
        }
      }
      // X = hit and suffix matches B; Y = prefix matches B.
      Rational q11(sumPS, denom), qX(sumS, denom);
      q11.canonicalize();
      qX.canonicalize();
      Rational q10 = qX - q11, q01 = prefixProb - q11;
      Rational q00 = Rational(1) - q11 - q10 - q01;
      // Two-state chain over blocks 2..L: state = X of the previous block.
      Enclosure a00 = Enclosure::from_rational(q00 + q01), a01 = Enclosure::from_rational(q10 + q11);
      Enclosure a10 = Enclosure::from_rational(q00), a11 = Enclosure::from_rational(q10);
      Enclosure s0 = Enclosure::from_int(1), s1 = Enclosure::exact_zero();
      {
        Enclosure m00 = a00, m01 = a01, m10 = a10, m11 = a11;
        BigInt e = steps;
        while (e > 0) {
          if (mpz_odd_p(e.get_mpz_t())) {
            Enclosure n0 = s0 * m00 + s1 * m10, n1 = s0 * m01 + s1 * m11;
            s0 = n0;
            s1 = n1;
          }
          e >>= 1;
          if (e > 0) {
            Enclosure b00 = m00 * m00 + m01 * m10, b01 = m00 * m01 + m01 * m11;
            Enclosure b10 = m10 * m00 + m11 * m10, b11 = m10 * m01 + m11 * m11;
            m00 = b00;
            m01 = b01;
            m10 = b10;
            m11 = b11;
          }
        }
      }
      Enclosure none = detail::clamp01(s0 + s1 * detail::one_minus(pY));
      Enclosure w = pf * pY;  // P(past pins, F_c = f, prefix of block 1)
      unionMass = unionMass + w * detail::one_minus(none);
      Enclosure h = Enclosure::from_rational(qX * prefixProb);
      predMass = predMass + w * detail::one_minus(detail::pow_enclosure(detail::one_minus(h), steps));
      blockMass = blockMass + w * h;
      firstMass = firstMass + pf * Enclosure::from_rational(q11 * prefixProb);
    }
    rep.pB = pastMass * pY;
    rep.unionProb = unionMass;
    rep.prediction = predMass;
    rep.blockHit = detail::clamp01(blockMass / rep.pB);
    rep.pooledPrediction = rep.pB * detail::one_minus(detail::pow_enclosure(detail::one_minus(rep.blockHit), steps));
    for (BigInt l = 1; l <= blocks; ++l) rep.rows.push_back({l, l == 1 ? firstMass : blockMass, true});
    detail::finish_report(rep);
    return rep;
  }

  // Monte Carlo conditional on B: B's coordinates are independent of the rest,
  // so they are pinned and P(B) enters as an exact factor.
  if (opt.trials == 0) fail(ErrorKind::InvalidArgument, "trials must be positive");
  rep.method = "montecarlo";
  rep.trials = opt.trials;
  rep.seed = opt.seed;
  rep.pB = cylinder_prob(L, B).enclosure();
  MarginalSampler sampler(L);
  std::vector<std::pair<BigInt, BigInt>> ranges;
  const std::size_t L_ = static_cast<std::size_t>(blocks.get_ui());
  for (std::size_t l = 1; l <= L_; ++l) {
    BigInt n = BigInt(static_cast<unsigned long>(l)) * lv.N;
    auto d = derivative_ranges(L, n);
    ranges.insert(ranges.end(), d.begin(), d.end());
    if (!B.empty()) ranges.emplace_back(B.lo() + n, B.hi() + n);
  }
  if (!B.empty()) ranges.emplace_back(B.lo(), B.hi());
  RatioTarget a = RatioTarget::lambda(L, t0);
  std::vector<std::uint64_t> hits(L_ + 1, 0), undecided(L_ + 1, 0);
  std::uint64_t unionHits = 0, unionUndecided = 0;
  // Strata by the scaled f_tau of the past: per stratum, trials and block hits.
  std::map<std::int64_t, std::pair<std::uint64_t, std::uint64_t>> strata;
  for (std::uint64_t tr = 0; tr < opt.trials; ++tr) {
    RngStream rng(opt.seed, tr);
    SegmentedWindow w = SegmentedWindow::sample(sampler, ranges, rng);
    w.assign(B);
    std::int64_t key = 0;
    for (int u = 1; u <= tau; ++u) key += upsilon(L, w, u) * W.scale[static_cast<std::size_t>(u - 1)];
    auto& st = strata[key];
    ++st.first;
    bool anyHit = false, anyUndecided = false;
    for (std::size_t l = 1; l <= L_; ++l) {
      BigInt n = BigInt(static_cast<unsigned long>(l)) * lv.N;
      if (!w.satisfies(B.shifted_by(BigInt(-n)))) continue;
      auto [center, tail] = log_derivative(L, w, n);
      BandResult c = classify(center, tail, a, eps);
      if (c == BandResult::Hit) {
        ++hits[l];
        if (l >= 2) {
          anyHit = true;
          ++st.second;
        }
      } else if (c == BandResult::Indeterminate) {
        ++undecided[l];
        if (l >= 2) anyUndecided = true;
      }
    }
    if (anyHit) {
      ++unionHits;
    } else if (anyUndecided) {
      ++unionUndecided;
    }
  }
  const double T = static_cast<double>(opt.trials);
  const double steps = static_cast<double>(L_ - 1);
  auto scaled = [&](double lo, double hi) {
    Enclosure e = Enclosure::hull(Real::from_double(lo), Real::from_double(hi));
    return e * rep.pB;
  };
  double pooled = 0.0;
  for (std::size_t l = 1; l <= L_; ++l) {
    WilsonInterval lo = wilson(static_cast<double>(hits[l]), T);
    WilsonInterval hi = wilson(static_cast<double>(hits[l] + undecided[l]), T);
    rep.rows.push_back({BigInt(static_cast<unsigned long>(l)), scaled(lo.low, hi.high), false});
    if (l >= 2) pooled += static_cast<double>(hits[l]) / T;
  }
  pooled /= steps;
  double predicted = 0.0;
  for (const auto& [key, st] : strata) {
    double h = static_cast<double>(st.second) / (static_cast<double>(st.first) * steps);
    predicted += static_cast<double>(st.first) / T * (1.0 - std::pow(1.0 - h, steps));
  }
  WilsonInterval ulo = wilson(static_cast<double>(unionHits), T);
  WilsonInterval uhi = wilson(static_cast<double>(unionHits + unionUndecided), T);
  rep.unionProb = scaled(ulo.low, uhi.high);
  rep.blockHit = Enclosure::from_double(pooled);
  rep.pooledPrediction = rep.pB * detail::one_minus(detail::pow_enclosure(detail::one_minus(rep.blockHit), blocks - 1));
  rep.prediction = Enclosure::from_double(predicted) * rep.pB;
  detail::finish_report(rep);
  return rep;
}

inline nlohmann::json enclosure_json(const Enclosure& e) {
  return {{"lo", e.lo().to_string(17)}, {"hi", e.hi().to_string(17)}};
}

inline nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"l", to_decimal(row.l)}, {"hitProb", enclosure_json(row.hitProb)}, {"exact", row.exact}});
  nlohmann::json j = {
      {"tau", r.tau},
      {"t0", r.t0},
      {"eps", to_string(r.eps)},
      {"B", r.B},
      {"blocks", to_decimal(r.blocks)},
      {"method", r.method},
      {"rows", rows},
      {"summary",
       {{"unionProb", enclosure_json(r.unionProb)},
        {"pB", enclosure_json(r.pB)},
        {"paperBound", enclosure_json(r.paperBound)},
        {"blockHit", enclosure_json(r.blockHit)},
        {"prediction", enclosure_json(r.prediction)},
        {"pooledPrediction", enclosure_json(r.pooledPrediction)},
        {"meetsPrediction", r.meetsPrediction},
        {"predictionAbove09", r.predictionAbove09},
        {"unionAbove09", r.unionAbove09},
        {"pass", r.pass}}},
  };
  if (r.method == "montecarlo") {
    j["trials"] = r.trials;
    j["seed"] = r.seed;
  }
  return j;
}

inline nlohmann::json to_json(const DCylinder& D) {
  return {{"d", D.d.to_string()}, {"l", to_decimal(D.l)},         {"t", D.t},
          {"t0", D.t0},           {"pExponent", to_decimal(D.pExponent)}, {"ones", D.ones}};
}

}  // namespace typeiii
