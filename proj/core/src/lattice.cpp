#include "cmt/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "cmt/error.hpp"

namespace cmt {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) fail(ErrorCode::TooLarge, "integer overflow in lattice arithmetic");
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_sub_overflow(a, b, &r)) fail(ErrorCode::TooLarge, "integer overflow in lattice arithmetic");
  return r;
}

// a -= q * b
void axpy_sub(IntVec& a, std::int64_t q, const IntVec& b) {
  if (q == 0) return;
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = checked_sub(a[i], checked_mul(q, b[i]));
}

bool is_zero(const IntVec& v) {
  return std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; });
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::vector<IntVec> hermite_normal_form(std::vector<IntVec> generators, std::size_t dimension) {
  std::vector<IntVec> pool;
  for (auto& g : generators) {
    require(g.size() == dimension, ErrorCode::InvalidArgument, "generator has wrong dimension");
    if (!is_zero(g)) pool.push_back(std::move(g));
  }
  std::vector<IntVec> basis;
  std::vector<std::size_t> pivot_rows;
  for (std::size_t row = 0; row < dimension && !pool.empty(); ++row) {
    for (;;) {
      std::size_t best = pool.size();
      std::size_t nonzero = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i][row] == 0) continue;
        ++nonzero;
        if (best == pool.size() || std::llabs(pool[i][row]) < std::llabs(pool[best][row])) best = i;
      }
      if (nonzero == 0) break;
      if (nonzero == 1) {
        IntVec pivot = std::move(pool[best]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
        if (pivot[row] < 0) {
          for (auto& x : pivot) x = -x;
        }
        basis.push_back(std::move(pivot));
        pivot_rows.push_back(row);
        break;
      }
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (i == best || pool[i][row] == 0) continue;
        axpy_sub(pool[i], pool[i][row] / pool[best][row], pool[best]);
      }
      pool.erase(std::remove_if(pool.begin(), pool.end(), is_zero), pool.end());
      // `best` may have shifted after the erase; the next pass re-selects it.
    }
  }
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const std::size_t p = pivot_rows[j];
    for (std::size_t k = 0; k < j; ++k) {
      axpy_sub(basis[k], floor_div(basis[k][p], basis[j][p]), basis[j]);
    }
  }
  return basis;
}

bool same_lattice(const std::vector<IntVec>& a, const std::vector<IntVec>& b, std::size_t dimension) {
  return hermite_normal_form(a, dimension) == hermite_normal_form(b, dimension);
}

bool hnf_contains(const std::vector<IntVec>& hnf, std::span<const std::int64_t> v) {
  IntVec r(v.begin(), v.end());
  for (const IntVec& b : hnf) {
    std::size_t p = 0;
    while (b[p] == 0) ++p;
    if (r[p] % b[p] != 0) return false;
    axpy_sub(r, r[p] / b[p], b);
  }
  return is_zero(r);
}

std::int64_t hnf_covolume(const std::vector<IntVec>& hnf, std::size_t dimension) {
  if (hnf.size() < dimension) return 0;
  std::int64_t det = 1;
  for (std::size_t j = 0; j < hnf.size(); ++j) det = checked_mul(det, hnf[j][j]);
  return det;
}

LatticeSpec::LatticeSpec(std::size_t dimension, std::vector<IntVec> basis)
    : dimension_(dimension), basis_(std::move(basis)) {
  require(dimension_ >= 1, ErrorCode::BadDimension, "lattice dimension must be >= 1");
  require(basis_.size() == dimension_, ErrorCode::InvalidArgument, "lattice basis must be square");
  hnf_ = hermite_normal_form(basis_, dimension_);
  require(hnf_.size() == dimension_, ErrorCode::InvalidArgument, "lattice basis is singular");
}

LatticeSpec LatticeSpec::integer(std::size_t dimension) {
  std::vector<IntVec> basis(dimension, IntVec(dimension, 0));
  for (std::size_t i = 0; i < dimension; ++i) basis[i][i] = 1;
  return LatticeSpec(dimension, std::move(basis));
}

LatticeSpec LatticeSpec::even(std::size_t dimension) {
  if (dimension == 1) return LatticeSpec(1, {{2}});
  // e_0 + e_i for i >= 1, plus 2 e_0.
  std::vector<IntVec> basis;
  IntVec twice(dimension, 0);
  twice[0] = 2;
  basis.push_back(twice);
  for (std::size_t i = 1; i < dimension; ++i) {
    IntVec b(dimension, 0);
    b[0] = 1;
    b[i] = 1;
    basis.push_back(b);
  }
  return LatticeSpec(dimension, std::move(basis));
}

JumpDistribution::JumpDistribution(std::vector<IntVec> atoms, std::vector<double> weights) {
  require(!atoms.empty(), ErrorCode::InvalidArgument, "jump distribution needs at least one atom");
  require(atoms.size() == weights.size(), ErrorCode::InvalidArgument, "atoms and weights differ in length");
  const std::size_t d = atoms.front().size();
  require(d >= 1, ErrorCode::BadDimension, "atoms need dimension >= 1");
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
  double total = 0.0;
  for (std::size_t i : order) {
    require(atoms[i].size() == d, ErrorCode::InvalidArgument, "atoms differ in dimension");
    require(weights[i] > 0.0 && std::isfinite(weights[i]), ErrorCode::InvalidArgument, "weights must be positive");
    if (!atoms_.empty()) {
      require(atoms_.back() != atoms[i], ErrorCode::InvalidArgument, "duplicate atom");
    }
    atoms_.push_back(atoms[i]);
    weights_.push_back(weights[i]);
    total += weights[i];
    cumulative_.push_back(total);
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "weights must sum to 1");
}

JumpDistribution JumpDistribution::uniform(std::vector<IntVec> atoms) {
  const std::size_t n = atoms.size();
  require(n > 0, ErrorCode::InvalidArgument, "jump distribution needs at least one atom");
  return JumpDistribution(std::move(atoms), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double JumpDistribution::weight_of(std::span<const std::int64_t> atom) const {
  IntVec a(atom.begin(), atom.end());
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
  if (it == atoms_.end() || *it != a) return 0.0;
  return weights_[static_cast<std::size_t>(it - atoms_.begin())];
}

void JumpDistribution::require_in(const LatticeSpec& lattice) const {
  require(dimension() == lattice.dimension(), ErrorCode::BadDimension, "jump law and lattice differ in dimension");
  for (const auto& a : atoms_) {
    require(lattice.contains(a), ErrorCode::InvalidArgument, "atom outside the lattice");
  }
}

CycleFreeResult check_cycle_free(const JumpDistribution& mu) {
  // Feasibility of { v : a.v >= 1 for every atom a } (scaling turns > 0 into >= 1).
  struct Constraint {
    std::vector<Rational> coeff;
    Rational rhs;
    bool operator==(const Constraint&) const = default;
  };
  const std::size_t d = mu.dimension();
  std::vector<Constraint> current;
  for (const auto& a : mu.atoms()) {
    Constraint c;
    for (auto x : a) c.coeff.emplace_back(x);
    c.rhs = 1;
    current.push_back(std::move(c));
  }

  // stages[k] holds the system over variables 0..k, used to back-substitute v_k.
  std::vector<std::vector<Constraint>> stages(d);
  for (std::size_t k = d; k-- > 0;) {
    stages[k] = current;
    std::vector<Constraint> lower, upper, next;
    for (const auto& c : current) {
      if (c.coeff[k] > 0) {
        lower.push_back(c);
      } else if (c.coeff[k] < 0) {
        upper.push_back(c);
      } else {
        next.push_back(c);
      }
    }
    for (const auto& lo : lower) {
      for (const auto& up : upper) {
        Constraint c;
        c.coeff.resize(d);
        const Rational a = lo.coeff[k];
        const Rational b = -up.coeff[k];
        for (std::size_t j = 0; j < d; ++j) c.coeff[j] = lo.coeff[j] / a + up.coeff[j] / b;
        c.coeff[k] = 0;
        c.rhs = lo.rhs / a + up.rhs / b;
        if (std::find(next.begin(), next.end(), c) == next.end()) next.push_back(std::move(c));
      }
    }
    current = std::move(next);
  }
  for (const auto& c : current) {
    if (c.rhs > 0) return {false, std::nullopt};
  }

  std::vector<Rational> v(d, 0);
  for (std::size_t k = 0; k < d; ++k) {
    std::optional<Rational> lo, hi;
    for (const auto& c : stages[k]) {
      if (c.coeff[k] == 0) continue;
      Rational rest = c.rhs;
      for (std::size_t j = 0; j < k; ++j) rest -= c.coeff[j] * v[j];
      const Rational bound = rest / c.coeff[k];
      if (c.coeff[k] > 0) {
        if (!lo || bound > *lo) lo = bound;
      } else {
        if (!hi || bound < *hi) hi = bound;
      }
    }
    Rational choice = 0;
    if (lo && *lo > 0) choice = *lo;
    if (hi && *hi < 0) choice = *hi;
    v[k] = choice;
  }

  BigInt scale = 1;
  for (const auto& x : v) scale = boost::multiprecision::lcm(scale, boost::multiprecision::denominator(x));
  std::vector<BigInt> ints;
  BigInt g = 0;
  for (const auto& x : v) {
    const BigInt n = boost::multiprecision::numerator(x) * (scale / boost::multiprecision::denominator(x));
    ints.push_back(n);
    g = boost::multiprecision::gcd(g, n);
  }
  IntVec witness;
  for (const auto& n : ints) {
    const BigInt r = g == 0 ? BigInt(0) : BigInt(n / g);
    require(r <= BigInt(INT64_MAX) && r >= BigInt(INT64_MIN), ErrorCode::TooLarge, "witness too large");
    witness.push_back(static_cast<std::int64_t>(r));
  }
  return {true, witness};
}

bool check_weak_irreducibility(const JumpDistribution& mu, const LatticeSpec& lattice) {
  mu.require_in(lattice);
  return hermite_normal_form(mu.atoms(), lattice.dimension()) == lattice.hermite_basis();
}

namespace {

std::vector<IntVec> differences(const JumpDistribution& mu) {
  std::vector<IntVec> diffs;
  const auto& atoms = mu.atoms();
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    IntVec d(atoms[i].size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = checked_sub(atoms[i][j], atoms[0][j]);
    diffs.push_back(std::move(d));
  }
  return diffs;
}

}  // namespace

bool check_weak_aperiodicity(const JumpDistribution& mu, const LatticeSpec& lattice) {
  mu.require_in(lattice);
  return hermite_normal_form(differences(mu), lattice.dimension()) == lattice.hermite_basis();
}

KernelConditionReport check_kernel(const JumpDistribution& mu, const LatticeSpec& lattice) {
  mu.require_in(lattice);
  KernelConditionReport r;
  const auto cf = check_cycle_free(mu);
  r.cycle_free = cf.cycle_free;
  r.separating_vector = cf.separating_vector;
  r.lattice_hnf = lattice.hermite_basis();
  r.support_hnf = hermite_normal_form(mu.atoms(), lattice.dimension());
  r.difference_hnf = hermite_normal_form(differences(mu), lattice.dimension());
  r.weakly_irreducible = r.support_hnf == r.lattice_hnf;
  r.weakly_aperiodic = r.difference_hnf == r.lattice_hnf;
  r.aperiodicity_flagged = !r.weakly_irreducible;
  const std::int64_t diff_cov = hnf_covolume(r.difference_hnf, lattice.dimension());
  r.difference_index = diff_cov == 0 ? 0 : diff_cov / lattice.covolume();
  return r;
}

bool KernelConditionReport::verify(const JumpDistribution& mu) const {
  if (cycle_free) {
    if (!separating_vector || separating_vector->size() != mu.dimension()) return false;
    for (const auto& a : mu.atoms()) {
      std::int64_t dot = 0;
      for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * (*separating_vector)[i];
      if (dot <= 0) return false;
    }
  }
  const std::size_t d = mu.dimension();
  // Generator certificates: each Hermite basis is recomputed from its source.
  if (hermite_normal_form(mu.atoms(), d) != support_hnf) return false;
  if (hermite_normal_form(lattice_hnf, d) != lattice_hnf) return false;
  for (const auto& a : mu.atoms()) {
    if (!hnf_contains(support_hnf, a)) return false;
  }
  if ((support_hnf == lattice_hnf) != weakly_irreducible) return false;
  if ((difference_hnf == lattice_hnf) != weakly_aperiodic) return false;
  return true;
}

std::string KernelConditionReport::to_text() const {
  auto vec = [](const IntVec& v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
    return os.str();
  };
  auto basis = [&](const std::vector<IntVec>& b) {
    std::string s;
    for (const auto& v : b) s += (s.empty() ? "" : " ") + vec(v);
    return s.empty() ? std::string("{0}") : s;
  };
  std::ostringstream os;
  os << "cycle_free: " << (cycle_free ? "true" : "false");
  if (separating_vector) os << " witness=" << vec(*separating_vector);
  os << '\n';
  os << "weakly_irreducible: " << (weakly_irreducible ? "true" : "false") << " support_hnf=" << basis(support_hnf)
     << " lattice_hnf=" << basis(lattice_hnf) << '\n';
  os << "weakly_aperiodic: " << (weakly_aperiodic ? "true" : "false") << " difference_hnf=" << basis(difference_hnf)
     << (aperiodicity_flagged ? " (flagged: irreducibility fails)" : "") << '\n';
  os << "difference_index: " << difference_index << '\n';
  return os.str();
}

}  // namespace cmt
