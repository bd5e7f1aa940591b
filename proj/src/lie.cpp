#include "lieclf/lie.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include "lieclf/errors.hpp"

namespace lieclf {

struct FormalBracket::Node {
  int generator = 0;
  int sign = 1;
  std::vector<FormalBracket> children;  // empty for a leaf, else {left, right}
  int degree = 1;
  long r = 1;
};

FormalBracket FormalBracket::leaf(int generator, int sign) {
  if (generator < 0) throw Error(ErrorKind::InvalidArgument, "negative generator index");
  if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidArgument, "leaf sign must be +1 or -1");
  auto n = std::make_shared<Node>();
  n->generator = generator;
  n->sign = sign;
  return FormalBracket(std::move(n));
}

FormalBracket FormalBracket::node(const FormalBracket& left, const FormalBracket& right) {
  auto n = std::make_shared<Node>();
  n->children = {left, right};
  n->degree = left.degree() + right.degree();
  n->r = 2 * (left.r() + right.r());
  return FormalBracket(std::move(n));
}

bool FormalBracket::is_leaf() const noexcept { return node_->children.empty(); }

int FormalBracket::generator() const {
  if (!is_leaf()) throw Error(ErrorKind::InvalidArgument, "generator() of a non-leaf bracket");
  return node_->generator;
}

int FormalBracket::sign() const {
  if (!is_leaf()) throw Error(ErrorKind::InvalidArgument, "sign() of a non-leaf bracket");
  return node_->sign;
}

const FormalBracket& FormalBracket::left() const {
  if (is_leaf()) throw Error(ErrorKind::InvalidArgument, "left() of a leaf");
  return node_->children[0];
}

const FormalBracket& FormalBracket::right() const {
  if (is_leaf()) throw Error(ErrorKind::InvalidArgument, "right() of a leaf");
  return node_->children[1];
}

int FormalBracket::degree() const noexcept { return node_->degree; }
long FormalBracket::r() const noexcept { return node_->r; }

FormalBracket FormalBracket::negated() const {
  if (is_leaf()) return leaf(generator(), -sign());
  return node(right(), left());
}

bool FormalBracket::involves(int generator) const {
  if (is_leaf()) return node_->generator == generator;
  return left().involves(generator) || right().involves(generator);
}

std::string FormalBracket::str() const {
  if (is_leaf()) return fmt::format("{}f{}", node_->sign < 0 ? "-" : "", node_->generator);
  return fmt::format("[{},{}]", left().str(), right().str());
}

std::strong_ordering operator<=>(const FormalBracket& a, const FormalBracket& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.degree() <=> b.degree(); c != 0) return c;
  if (a.is_leaf() != b.is_leaf()) return a.is_leaf() ? std::strong_ordering::less : std::strong_ordering::greater;
  if (a.is_leaf()) {
    if (auto c = a.generator() <=> b.generator(); c != 0) return c;
    return b.sign() <=> a.sign();
  }
  if (auto c = a.left() <=> b.left(); c != 0) return c;
  return a.right() <=> b.right();
}

namespace {

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : text_(text) {}

  FormalBracket parse() {
    FormalBracket b = term();
    skip();
    if (pos_ != text_.size()) fail("trailing characters");
    return b;
  }

 private:
  [[noreturn]] void fail(std::string_view why) const {
    throw Error(ErrorKind::Parse, fmt::format("{} at column {} in bracket \"{}\"", why, pos_ + 1, text_));
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  FormalBracket term() {
    if (accept('[')) {
      FormalBracket l = term();
      if (!accept(',')) fail("expected ','");
      FormalBracket r = term();
      if (!accept(']')) fail("expected ']'");
      return FormalBracket::node(l, r);
    }
    int sign = 1;
    if (accept('-')) {
      sign = -1;
    } else {
      accept('+');
    }
    if (!accept('f')) fail("expected generator fN");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected generator index");
    int g = 0;
    std::from_chars(text_.data() + start, text_.data() + pos_, g);
    return FormalBracket::leaf(g, sign);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

FormalBracket FormalBracket::parse(std::string_view text) { return BracketParser(text).parse(); }

std::vector<FormalBracket> enumerate_brackets(int m, int k) {
  if (k <= 0) throw Error(ErrorKind::DegreeOutOfRange, "maximal degree must be at least 1");
  if (m <= 0) throw Error(ErrorKind::InvalidArgument, "at least one generator required");
  std::vector<std::vector<FormalBracket>> by_degree(static_cast<std::size_t>(k) + 1);
  for (int i = 1; i <= m; ++i) by_degree[1].push_back(FormalBracket::leaf(i));
  for (int d = 2; d <= k; ++d) {
    for (int a = 1; a <= d / 2; ++a) {
      for (const FormalBracket& l : by_degree[static_cast<std::size_t>(a)]) {
        for (const FormalBracket& r : by_degree[static_cast<std::size_t>(d - a)]) {
          if (l < r) by_degree[static_cast<std::size_t>(d)].push_back(FormalBracket::node(l, r));
        }
      }
    }
    std::sort(by_degree[static_cast<std::size_t>(d)].begin(), by_degree[static_cast<std::size_t>(d)].end());
  }
  std::vector<FormalBracket> out;
  for (int i = 1; i <= m; ++i) {
    out.push_back(FormalBracket::leaf(i, +1));
    out.push_back(FormalBracket::leaf(i, -1));
  }
  for (int d = 2; d <= k; ++d) {
    for (const FormalBracket& b : by_degree[static_cast<std::size_t>(d)]) out.push_back(b);
  }
  return out;
}

namespace {

VectorFieldDef build_field(const FormalBracket& b, std::span<const VectorFieldDef> generators,
                           const VectorFieldDef* drift, std::map<std::string, VectorFieldDef>& memo) {
  const std::string key = b.str();
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  VectorFieldDef out;
  if (b.is_leaf()) {
    const VectorFieldDef* base = nullptr;
    if (b.generator() == 0) {
      if (drift == nullptr) throw Error(ErrorKind::InvalidArgument, "bracket uses f0 but the system has no drift");
      base = drift;
    } else if (static_cast<std::size_t>(b.generator()) <= generators.size()) {
      base = &generators[static_cast<std::size_t>(b.generator()) - 1];
    } else {
      throw Error(ErrorKind::InvalidArgument, fmt::format("bracket uses f{} beyond the {} generators",
                                                          b.generator(), generators.size()));
    }
    if (b.sign() > 0) {
      out = *base;
    } else {
      std::vector<Expr> neg;
      for (const Expr& c : base->components()) neg.push_back(-c);
      out = VectorFieldDef(base->dim(), std::move(neg));
    }
  } else {
    out = lie_bracket(build_field(b.left(), generators, drift, memo),
                      build_field(b.right(), generators, drift, memo));
  }
  memo.emplace(key, out);
  return out;
}

}  // namespace

VectorFieldDef bracket_field(const FormalBracket& b, std::span<const VectorFieldDef> generators,
                             const VectorFieldDef* drift) {
  std::map<std::string, VectorFieldDef> memo;
  return build_field(b, generators, drift, memo);
}

Vec eval_bracket(const FormalBracket& b, std::span<const VectorFieldDef> generators, const Vec& x) {
  return bracket_field(b, generators).eval(x);
}

// ---------------------------------------------------------------------------
// Convex hull membership by Wolfe's minimum-norm-point method.

namespace {

Vec min_norm_point(const std::vector<Vec>& P) {
  const std::size_t n = P.size();
  double scale = 0.0;
  for (const Vec& p : P) scale = std::max(scale, p.squaredNorm());
  const double eps = 1e-14 * std::max(scale, 1e-300);

  std::vector<std::size_t> S;
  std::vector<double> w;
  {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (P[i].squaredNorm() < P[best].squaredNorm()) best = i;
    }
    S = {best};
    w = {1.0};
  }
  auto current = [&] {
    Vec x = Vec::Zero(P[0].size());
    for (std::size_t a = 0; a < S.size(); ++a) x += w[a] * P[S[a]];
    return x;
  };

  for (int outer = 0; outer < 200; ++outer) {
    const Vec x = current();
    std::size_t j = 0;
    double best = x.dot(P[0]);
    for (std::size_t i = 1; i < n; ++i) {
      const double v = x.dot(P[i]);
      if (v < best) {
        best = v;
        j = i;
      }
    }
    if (x.squaredNorm() - best <= eps || std::find(S.begin(), S.end(), j) != S.end()) return x;
    S.push_back(j);
    w.push_back(0.0);

    for (int inner = 0; inner < 200; ++inner) {
      const Eigen::Index s = static_cast<Eigen::Index>(S.size());
      Mat K = Mat::Zero(s + 1, s + 1);
      for (Eigen::Index a = 0; a < s; ++a) {
        for (Eigen::Index b = 0; b < s; ++b) K(a, b) = P[S[a]].dot(P[S[b]]);
        K(a, s) = 1.0;
        K(s, a) = 1.0;
      }
      Vec rhs = Vec::Zero(s + 1);
      rhs[s] = 1.0;
      const Vec sol = K.completeOrthogonalDecomposition().solve(rhs);
      const Vec v = sol.head(s);
      if ((v.array() > 1e-15).all()) {
        w.assign(v.data(), v.data() + s);
        break;
      }
      double theta = 1.0;
      for (Eigen::Index a = 0; a < s; ++a) {
        if (v[a] <= 1e-15) {
          const double denom = w[a] - v[a];
          if (denom > 0.0) theta = std::min(theta, w[a] / denom);
        }
      }
      std::vector<std::size_t> S2;
      std::vector<double> w2;
      for (Eigen::Index a = 0; a < s; ++a) {
        const double nw = w[a] + theta * (v[a] - w[a]);
        if (nw > 1e-15) {
          S2.push_back(S[a]);
          w2.push_back(nw);
        }
      }
      if (S2.empty()) {
        S2 = {S.back()};
        w2 = {1.0};
      }
      double total = 0.0;
      for (double e : w2) total += e;
      for (double& e : w2) e /= total;
      S = std::move(S2);
      w = std::move(w2);
    }
  }
  return current();
}

}  // namespace

double distance_to_hull(const Vec& q, std::span<const Vec> points) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "hull of an empty set");
  std::vector<Vec> shifted;
  shifted.reserve(points.size());
  for (const Vec& p : points) shifted.push_back(p - q);
  return min_norm_point(shifted).norm();
}

std::vector<Vec> extreme_points(std::vector<Vec> points) {
  std::vector<Vec> unique;
  double scale = 1.0;
  for (const Vec& p : points) scale = std::max(scale, p.lpNorm<Eigen::Infinity>());
  const double tol = 1e-12 * scale;
  for (Vec& p : points) {
    const bool dup = std::any_of(unique.begin(), unique.end(),
                                 [&](const Vec& u) { return (u - p).lpNorm<Eigen::Infinity>() <= tol; });
    if (!dup) unique.push_back(std::move(p));
  }
  for (std::size_t i = 0; i < unique.size() && unique.size() > 1;) {
    std::vector<Vec> others;
    for (std::size_t j = 0; j < unique.size(); ++j) {
      if (j != i) others.push_back(unique[j]);
    }
    if (distance_to_hull(unique[i], others) <= 1e-10 * scale) {
      unique.erase(unique.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return unique;
}

SetValuedBracket::SetValuedBracket(int i, int j, PiecewiseVectorFieldDef fi, PiecewiseVectorFieldDef fj)
    : i_(i), j_(j), fi_(std::move(fi)), fj_(std::move(fj)) {
  if (fi_.dim() != fj_.dim()) throw Error(ErrorKind::DimensionMismatch, "set-valued bracket of mismatched fields");
  if (i_ == j_) return;
  for (const Piece& a : fi_.pieces()) {
    for (const Piece& b : fj_.pieces()) pair_fields_.push_back(lie_bracket(a.field, b.field));
  }
}

BracketValueSet SetValuedBracket::eval(const Vec& x) const {
  if (i_ == j_) return {{Vec::Zero(fi_.dim())}};
  const auto a = fi_.pieces_containing(as_span(x));
  const auto b = fj_.pieces_containing(as_span(x));
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::EmptyPieceSet, "no piece's closed region contains the point");
  }
  std::vector<Vec> values;
  const std::size_t nb = fj_.pieces().size();
  for (int pa : a) {
    for (int pb : b) values.push_back(pair_fields_[static_cast<std::size_t>(pa) * nb + static_cast<std::size_t>(pb)].eval(x));
  }
  return {extreme_points(std::move(values))};
}

BracketValueSet eval_bracket_setvalued(int i, int j, const PiecewiseVectorFieldDef& fi,
                                       const PiecewiseVectorFieldDef& fj, const Vec& x) {
  return SetValuedBracket(i, j, fi, fj).eval(x);
}

}  // namespace lieclf
