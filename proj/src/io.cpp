#include "wtn/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace wtn::io {

namespace {

Json row_major(const Matrix& x) {
  Json arr = Json::array();
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) arr.push_back(x(i, j));
  return arr;
}

Matrix from_row_major(const Json& arr, Index n, Index m) {
  require(arr.is_array() && static_cast<Index>(arr.size()) == n * m, "row-major array has the wrong length");
  Matrix x(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) x(i, j) = arr[static_cast<std::size_t>(i * m + j)].get<double>();
  return x;
}

Json rows_of(const Matrix& x) {
  Json arr = Json::array();
  for (Index i = 0; i < x.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
    arr.push_back(std::move(row));
  }
  return arr;
}

Matrix from_rows(const Json& arr, Index cols) {
  require(arr.is_array(), "expected an array of rows");
  Matrix x(static_cast<Index>(arr.size()), cols);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    require(static_cast<Index>(arr[i].size()) == cols, "ragged factor matrix");
    for (Index j = 0; j < cols; ++j) x(static_cast<Index>(i), j) = arr[i][static_cast<std::size_t>(j)].get<double>();
  }
  return x;
}

Vector to_vector(const Json& arr) {
  require(arr.is_array(), "expected an array");
  Vector v(static_cast<Index>(arr.size()));
  for (std::size_t k = 0; k < arr.size(); ++k) v(static_cast<Index>(k)) = arr[k].get<double>();
  return v;
}

}  // namespace

Json to_json(const JointDistribution& dist) {
  return {{"n", dist.rows()}, {"m", dist.cols()}, {"mass", row_major(dist.mass())}};
}

JointDistribution distribution_from_json(const Json& doc) {
  const Index n = doc.at("n").get<Index>();
  const Index m = doc.at("m").get<Index>();
  require(n > 0 && m > 0, "distribution dimensions must be positive");
  return JointDistribution::from_mass(from_row_major(doc.at("mass"), n, m));
}

Json to_json(const MarginalWeights& w) {
  return {{"kind", to_string(w.kind)},
          {"alpha", w.alpha},
          {"row", std::vector<double>(w.row.data(), w.row.data() + w.row.size())},
          {"col", std::vector<double>(w.col.data(), w.col.data() + w.col.size())}};
}

MarginalWeights weights_from_json(const Json& doc) {
  MarginalWeights w;
  w.kind = weight_kind_from_string(doc.at("kind").get<std::string>());
  w.alpha = doc.value("alpha", 1.0);
  w.row = to_vector(doc.at("row"));
  w.col = to_vector(doc.at("col"));
  w.validate();
  return w;
}

Json to_json(const CompletionModel& model) {
  if (!model.is_factored()) {
    const Matrix& x = model.dense_matrix();
    return {{"type", "dense"}, {"n", x.rows()}, {"m", x.cols()}, {"X", row_major(x)}};
  }
  const FactorPair& f = model.factors();
  return {{"type", "factored"}, {"n", f.U.rows()}, {"m", f.V.rows()}, {"k", f.U.cols()},
          {"U", rows_of(f.U)}, {"V", rows_of(f.V)}};
}

CompletionModel model_from_json(const Json& doc) {
  const std::string type = doc.at("type").get<std::string>();
  const Index n = doc.at("n").get<Index>();
  const Index m = doc.at("m").get<Index>();
  if (type == "dense") return CompletionModel::dense(from_row_major(doc.at("X"), n, m));
  require(type == "factored", "unknown model type: " + type);
  const Index k = doc.at("k").get<Index>();
  Matrix u = from_rows(doc.at("U"), k);
  Matrix v = from_rows(doc.at("V"), k);
  require(u.rows() == n && v.rows() == m, "factor shapes disagree with n, m");
  return CompletionModel::factored(std::move(u), std::move(v));
}

void write_sample_csv(std::ostream& out, const SampleSet& sample) {
  sample.validate();
  out << "t,i,j,value\n" << std::setprecision(17);
  for (std::size_t t = 0; t < sample.size(); ++t)
    out << t << ',' << sample.indexes[t].i << ',' << sample.indexes[t].j << ',' << sample.values[t] << '\n';
}

SampleSet read_sample_csv(std::istream& in, Index n, Index m) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty sample CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "t,i,j,value", "sample CSV header must be t,i,j,value");
  SampleSet set;
  Index max_i = -1, max_j = -1;
  std::size_t expected_t = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::size_t t = 0;
    Cell c;
    double value = 0.0;
    require(static_cast<bool>(fields >> t >> c.i >> c.j >> value), "malformed sample CSV row: " + line);
    require(t == expected_t++, "sample CSV rows must be numbered 0, 1, 2, ...");
    max_i = std::max(max_i, c.i);
    max_j = std::max(max_j, c.j);
    set.indexes.push_back(c);
    set.values.push_back(value);
  }
  set.n = n > 0 ? n : max_i + 1;
  set.m = m > 0 ? m : max_j + 1;
  set.validate();
  return set;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path.string());
  return Json::parse(in);
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  require(out.good(), "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace wtn::io
