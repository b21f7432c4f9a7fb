#include "selfnorm/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/hash.hpp"

namespace selfnorm {

using nlohmann::json;

Dataset::Dataset(Eigen::Index dim, Eigen::Index num_labels, InputMatrix inputs,
                 Eigen::VectorXi labels, DatasetProvenance provenance)
    : dim_(dim),
      num_labels_(num_labels),
      inputs_(std::move(inputs)),
      labels_(std::move(labels)),
      provenance_(std::move(provenance)) {
  if (labels_.size() < 1) throw ConfigError("dataset must contain at least one record");
  if (dim_ < 1 || num_labels_ < 1) throw ConfigError("dataset needs d >= 1 and K >= 1");
  if (inputs_.rows() != labels_.size() || inputs_.cols() != dim_)
    throw ConfigError("dataset input matrix has shape " + std::to_string(inputs_.rows()) + " x " +
                      std::to_string(inputs_.cols()) + ", expected " +
                      std::to_string(labels_.size()) + " x " + std::to_string(dim_));
  inputs_.makeCompressed();
  for (Eigen::Index i = 0; i < labels_.size(); ++i) {
    if (labels_(i) < 0 || labels_(i) >= num_labels_)
      throw ConfigError("record " + std::to_string(i) + " has label " +
                        std::to_string(labels_(i)) + " outside [0, " +
                        std::to_string(num_labels_) + ")");
    if (inputs_.coeff(i, 0) != 1.0)
      throw ConfigError("record " + std::to_string(i) + " lacks the constant feature x_0 = 1");
  }
}

Dataset Dataset::from_records(Eigen::Index dim, Eigen::Index num_labels,
                              const std::vector<std::pair<SparseEntries, int>>& records,
                              DatasetProvenance provenance) {
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXi labels(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& [j, v] : records[i].first) {
      if (j < 0 || j >= dim)
        throw ConfigError("record " + std::to_string(i) + " has feature index " +
                          std::to_string(j) + " outside [0, " + std::to_string(dim) + ")");
      if (!std::isfinite(v)) throw ConfigError("record " + std::to_string(i) + " has a non-finite value");
      triplets.emplace_back(static_cast<Eigen::Index>(i), j, v);
    }
    labels(static_cast<Eigen::Index>(i)) = records[i].second;
  }
  InputMatrix x(static_cast<Eigen::Index>(records.size()), dim);
  x.setFromTriplets(triplets.begin(), triplets.end());
  return Dataset(dim, num_labels, std::move(x), std::move(labels), std::move(provenance));
}

Dataset Dataset::from_dense(const Eigen::MatrixXd& inputs, const Eigen::VectorXi& labels,
                            Eigen::Index num_labels, DatasetProvenance provenance) {
  InputMatrix x = inputs.sparseView();
  return Dataset(inputs.cols(), num_labels, std::move(x), labels, std::move(provenance));
}

Eigen::VectorXd Dataset::input(Eigen::Index i) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim_);
  for (InputMatrix::InnerIterator it(inputs_, i); it; ++it) x(it.col()) = it.value();
  return x;
}

Eigen::MatrixXd Dataset::dense_inputs() const { return Eigen::MatrixXd(inputs_); }

Dataset Dataset::repeated(int copies) const {
  if (copies < 1) throw ArgumentError("repeated() needs at least one copy");
  std::vector<Eigen::Triplet<double>> triplets;
  const Eigen::Index n = size();
  Eigen::VectorXi labels(n * copies);
  for (int c = 0; c < copies; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (InputMatrix::InnerIterator it(inputs_, i); it; ++it)
        triplets.emplace_back(c * n + i, it.col(), it.value());
      labels(c * n + i) = labels_(i);
    }
  }
  InputMatrix x(n * copies, dim_);
  x.setFromTriplets(triplets.begin(), triplets.end());
  return Dataset(dim_, num_labels_, std::move(x), std::move(labels), provenance_);
}

std::uint64_t Dataset::hash() const {
  Fnv1a h;
  h.add(static_cast<std::int64_t>(dim_));
  h.add(static_cast<std::int64_t>(num_labels_));
  h.add(static_cast<std::int64_t>(size()));
  for (Eigen::Index i = 0; i < size(); ++i) {
    for (InputMatrix::InnerIterator it(inputs_, i); it; ++it) {
      h.add(static_cast<std::int64_t>(it.col()));
      h.add(it.value());
    }
    h.add(static_cast<std::int64_t>(-1));
    h.add(static_cast<std::int64_t>(labels_(i)));
  }
  return h.value();
}

void write_jsonl(const Dataset& ds, std::ostream& out) {
  const auto& p = ds.provenance();
  json header = {{"d", ds.dim()},
                 {"K", ds.num_labels()},
                 {"seed", p.seed},
                 {"n", ds.size()},
                 {"tau", p.tau},
                 {"config_hash", p.config_hash},
                 {"generator", p.generator}};
  out << header.dump() << '\n';
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    json entries = json::array();
    for (InputMatrix::InnerIterator it(ds.inputs(), i); it; ++it)
      entries.push_back(json::array({it.col(), it.value()}));
    json rec = {{"x", std::move(entries)}, {"y", ds.labels()(i)}};
    out << rec.dump() << '\n';
  }
}

Dataset read_jsonl(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset stream is empty");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed dataset header: ") + e.what());
  }
  if (!header.contains("d") || !header.contains("K") || !header.contains("seed"))
    throw ConfigError("dataset header must carry d, K and seed");
  const auto dim = header.at("d").get<Eigen::Index>();
  const auto classes = header.at("K").get<Eigen::Index>();
  DatasetProvenance prov;
  prov.seed = header.at("seed").get<std::uint64_t>();
  prov.tau = header.value("tau", 0.0);
  prov.config_hash = header.value("config_hash", std::uint64_t{0});
  prov.generator = header.value("generator", std::string{});

  std::vector<std::pair<SparseEntries, int>> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      SparseEntries entries;
      for (const auto& e : rec.at("x")) entries.emplace_back(e.at(0).get<Eigen::Index>(), e.at(1).get<double>());
      records.emplace_back(std::move(entries), rec.at("y").get<int>());
    } catch (const json::exception& e) {
      throw ConfigError("malformed dataset record on line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Dataset::from_records(dim, classes, records, std::move(prov));
}

void write_jsonl_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_jsonl(ds, out);
}

Dataset read_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return read_jsonl(in);
}

}  // namespace selfnorm
