#include "cluslasso/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "cluslasso/rng.hpp"
#include "json.hpp"

namespace cluslasso {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

double parse_double(std::string_view tok, std::size_t line, std::size_t col) {
  std::string_view s = tok;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line, col, "bad number '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(line, col, "non-finite value");
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

LabeledMatrix parse_libsvm(std::istream& in, Index min_cols) {
  using Triplet = Eigen::Triplet<double, std::int64_t>;
  std::vector<Triplet> entries;
  std::vector<double> labels;
  Index max_col = 0;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    const std::string_view line(text);
    std::size_t pos = 0;
    auto skip = [&] {
      while (pos < line.size() && is_space(line[pos])) ++pos;
    };
    auto token = [&] {
      const std::size_t start = pos;
      while (pos < line.size() && !is_space(line[pos])) ++pos;
      return line.substr(start, pos - start);
    };
    skip();
    if (pos == line.size() || line[pos] == '#') continue;
    const std::size_t label_col = pos + 1;
    labels.push_back(parse_double(token(), line_no, label_col));
    const auto row = static_cast<std::int64_t>(labels.size() - 1);
    std::int64_t prev = 0;
    for (skip(); pos < line.size(); skip()) {
      if (line[pos] == '#') break;
      const std::size_t col = pos + 1;
      const std::string_view tok = token();
      const std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos) throw ParseError(line_no, col, "expected idx:val");
      std::int64_t idx = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (ec != std::errc() || ptr != tok.data() + colon || colon == 0) {
        throw ParseError(line_no, col, "bad index '" + std::string(tok.substr(0, colon)) + "'");
      }
      if (idx < 1) throw ParseError(line_no, col, "indices are 1-based");
      if (idx <= prev) throw ParseError(line_no, col, "indices must be strictly increasing");
      prev = idx;
      const double v = parse_double(tok.substr(colon + 1), line_no, col + colon + 1);
      entries.emplace_back(row, idx - 1, v);
      max_col = std::max<Index>(max_col, idx);
    }
  }
  if (labels.empty()) throw ParseError(line_no, 0, "no data rows");
  const Index n = std::max(max_col, min_cols);
  DesignMatrix::Csr a(static_cast<Index>(labels.size()), n);
  a.setFromTriplets(entries.begin(), entries.end());
  return {DesignMatrix(std::move(a)), Eigen::Map<const Vec>(labels.data(), Index(labels.size()))};
}

LabeledMatrix read_libsvm(const std::string& path, Index min_cols) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_libsvm(in, min_cols);
}

void write_libsvm(std::ostream& out, const DesignMatrix& a, const Vec& b) {
  require_dim(b.size(), a.rows(), "write_libsvm");
  std::string line;
  const auto* csr = a.csr();
  for (Index i = 0; i < a.rows(); ++i) {
    line.clear();
    append_double(line, b[i]);
    auto put = [&](Index j, double v) {
      if (v == 0.0) return;
      line += ' ';
      line += std::to_string(j + 1);
      line += ':';
      append_double(line, v);
    };
    if (csr) {
      for (DesignMatrix::Csr::InnerIterator it(*csr, i); it; ++it) put(it.col(), it.value());
    } else {
      for (Index j = 0; j < a.cols(); ++j) put(j, (*a.dense())(i, j));
    }
    line += '\n';
    out << line;
  }
}

void write_libsvm(const std::string& path, const DesignMatrix& a, const Vec& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_libsvm(out, a, b);
  if (!out) throw IoError("write failed for '" + path + "'");
}

DesignMatrix densify_if_full(DesignMatrix a, double max_density) {
  if (!a.is_sparse() || a.cols() == 0) return a;
  const double density = double(a.nonzeros()) / (double(a.rows()) * double(a.cols()));
  if (density <= max_density) return a;
  return DesignMatrix(DesignMatrix::Dense(a.to_dense()));
}

// ---- scenarios

void ScenarioSpec::validate() const {
  if (id < 1 || id > 7) throw std::invalid_argument("ScenarioSpec: id must be in [1, 7]");
  if (k < 1) throw std::invalid_argument("ScenarioSpec: k must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("ScenarioSpec: train_fraction must lie in (0, 1]");
  }
  if (m_override < 0) throw std::invalid_argument("ScenarioSpec: m_override must be >= 0");
}

namespace {

std::vector<double> base_vector(int id) {
  switch (id) {
    case 1:
      return {3, 1.5, 0, 0, 0, 2, 0, 0};
    case 2: {
      std::vector<double> v(20, 0.0);
      std::fill(v.begin() + 5, v.begin() + 10, 2.0);
      std::fill(v.begin() + 15, v.end(), 2.0);
      return v;
    }
    case 3: {
      std::vector<double> v{5, 5, 5, 2, 2, 2, 10, 10, 10};
      v.resize(20, 0.0);
      return v;
    }
    case 4:
    case 5:
      return {0, 0, -1.5, -1.5, -2, -2, 0, 0, 1, 1, 4, 4, 4};
    case 6:
      return {0, 0, 0, 4, 4, 4, 4, 4, -4, -4, -4, -4, -4, 2, 2, -1};
    default:
      throw std::invalid_argument("scenario id must be in [1, 7]");
  }
}

// 100 standard normals binned into 20 equal-width bins over [min, max].
std::vector<double> histogram_vector(Rng& rng) {
  std::vector<double> nu(100);
  for (double& v : nu) v = rng.normal();
  const auto [lo, hi] = std::minmax_element(nu.begin(), nu.end());
  const double width = (*hi - *lo) / 20.0;
  std::vector<double> counts(20, 0.0);
  for (double v : nu) {
    const auto bin = std::min<Index>(19, static_cast<Index>((v - *lo) / width));
    counts[bin] += 1.0;
  }
  return counts;
}

Vec coefficients(int id, int k, Rng& rng) {
  if (id == 7) {
    const std::vector<double> x0 = histogram_vector(rng);
    Vec x(40 * Index(k));
    for (Index r = 0; r < 2 * Index(k); ++r) x.segment(20 * r, 20) = Eigen::Map<const Vec>(x0.data(), 20);
    return x;
  }
  const std::vector<double> x0 = base_vector(id);
  Vec x(Index(x0.size()) * k);
  for (Index i = 0; i < Index(x0.size()); ++i) x.segment(i * k, k).setConstant(x0[i]);
  return x;
}

void check_id_k(int id, int k) {
  if (id < 1 || id > 7) throw std::invalid_argument("scenario id must be in [1, 7]");
  if (k < 1) throw std::invalid_argument("scenario k must be >= 1");
}

// One row of predictors with the scenario's correlation, all with unit variance.
class RowSampler {
 public:
  RowSampler(int id, int k, Index n) : id_(id), k_(k), n_(n) {}

  void sample(Rng& rng, double* row, Index stride) const {
    switch (id_) {
      case 1:
      case 4:
      case 5: {
        const double g = id_ == 4 ? 0.5 : 0.9;
        const double s = std::sqrt(1.0 - g * g);
        double prev = rng.normal();
        row[0] = prev;
        for (Index j = 1; j < n_; ++j) {
          prev = g * prev + s * rng.normal();
          row[j * stride] = prev;
        }
        return;
      }
      case 2:
      case 7: {
        const double c = id_ == 2 ? 0.3 : 0.5;
        const double f = std::sqrt(c) * rng.normal();
        const double s = std::sqrt(1.0 - c);
        for (Index j = 0; j < n_; ++j) row[j * stride] = f + s * rng.normal();
        return;
      }
      case 3: {
        double f[3];
        for (double& v : f) v = std::sqrt(0.9) * rng.normal();
        const double s = std::sqrt(0.1);
        const Index block = 3 * Index(k_);
        for (Index j = 0; j < n_; ++j) {
          const double z = rng.normal();
          row[j * stride] = j < 3 * block ? f[j / block] + s * z : z;
        }
        return;
      }
      case 6: {
        const double f = std::sqrt(0.8) * rng.normal();
        const double s = std::sqrt(0.2);
        for (Index j = 0; j < n_; ++j) row[j * stride] = (j % 2 == 0 ? f : -f) + s * rng.normal();
        return;
      }
      default:
        throw std::invalid_argument("scenario id must be in [1, 7]");
    }
  }

 private:
  int id_;
  int k_;
  Index n_;
};

}  // namespace

Index base_length(int id) { return id == 7 ? 20 : Index(base_vector(id).size()); }

Index scenario_cols(int id, int k) {
  check_id_k(id, k);
  return id == 7 ? 40 * Index(k) : base_length(id) * k;
}

Vec true_coefficients(int id, int k, std::uint64_t seed) {
  check_id_k(id, k);
  Rng rng(seed);
  return coefficients(id, k, rng);
}

Mat scenario_correlation(int id, int k) {
  const Index n = scenario_cols(id, k);
  Mat c(n, n);
  const Index block = 3 * Index(k);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const auto d = static_cast<double>(std::abs(i - j));
      double v = 0.0;
      switch (id) {
        case 1:
        case 5:
          v = std::pow(0.9, d);
          break;
        case 4:
          v = std::pow(0.5, d);
          break;
        case 2:
          v = 0.3;
          break;
        case 7:
          v = 0.5;
          break;
        case 3:
          v = (i < 3 * block && j < 3 * block && i / block == j / block) ? 0.9 : 0.0;
          break;
        case 6:
          v = (std::abs(i - j) % 2 == 0 ? 0.8 : -0.8);
          break;
      }
      c(i, j) = i == j ? 1.0 : v;
    }
  }
  return c;
}

SyntheticProblem generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticProblem out;
  out.spec = spec;
  out.x_true = coefficients(spec.id, spec.k, rng);
  const Index n = out.x_true.size();
  const Index m = spec.m_override > 0 ? spec.m_override
                                      : std::max<Index>(80000, static_cast<Index>(std::ceil(0.5 * double(n) * spec.k)));
  const Index m_train = static_cast<Index>(std::llround(spec.train_fraction * double(m)));
  if (m_train < 1) throw std::invalid_argument("generate_scenario: no training rows");

  DesignMatrix::Dense a(m, n);
  const RowSampler sampler(spec.id, spec.k, n);
  for (Index i = 0; i < m; ++i) sampler.sample(rng, a.data() + i, m);
  const Vec ax = a * out.x_true;
  Vec eps(m);
  for (Index i = 0; i < m; ++i) eps[i] = rng.normal();
  out.sigma_noise = 0.1 * ax.norm() / eps.norm();
  const Vec b = ax + out.sigma_noise * eps;

  out.data = ProblemData(DesignMatrix(DesignMatrix::Dense(a.topRows(m_train))), b.head(m_train), Penalties{});
  if (m_train < m) {
    out.a_test = DesignMatrix(DesignMatrix::Dense(a.bottomRows(m - m_train)));
    out.b_test = b.tail(m - m_train);
  }
  return out;
}

Penalties penalties_from_alphas(double alpha1, double alpha2, const DesignMatrix& a, const Vec& b) {
  if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw std::invalid_argument("penalties_from_alphas: need 0 < alpha1 < 1");
  if (!(alpha2 > 0.0)) throw std::invalid_argument("penalties_from_alphas: need alpha2 > 0");
  const double scale = a.tmatvec(b).lpNorm<Eigen::Infinity>();
  if (!(scale > 0.0)) throw std::invalid_argument("penalties_from_alphas: A^T b = 0 gives beta = 0");
  const double beta = alpha1 * scale;
  return {beta, alpha2 * beta};
}

void write_sidecar(const std::string& path, const SyntheticProblem& p) {
  nlohmann::json j;
  j["scenario"] = p.spec.id;
  j["k"] = p.spec.k;
  j["seed"] = p.spec.seed;
  j["train_fraction"] = p.spec.train_fraction;
  j["m_override"] = p.spec.m_override;
  j["n"] = p.x_true.size();
  j["m_train"] = p.data.m();
  j["m_test"] = p.b_test.size();
  j["sigma_noise"] = p.sigma_noise;
  j["x_true"] = std::vector<double>(p.x_true.data(), p.x_true.data() + p.x_true.size());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace cluslasso
