#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace selfnorm {

/// Row-major sparse input matrix; row i is the input vector x_i.
using InputMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// One sparse input as (index, value) pairs.
using SparseEntries = std::vector<std::pair<Eigen::Index, double>>;

struct DatasetProvenance {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  double tau = 0.0;
  std::string generator;
};

/// n labelled inputs sharing dimension d, every input carrying the constant
/// feature x_0 = 1 and every label in [0, K).
class Dataset {
 public:
  Dataset(Eigen::Index dim, Eigen::Index num_labels, InputMatrix inputs, Eigen::VectorXi labels,
          DatasetProvenance provenance = {});

  static Dataset from_records(Eigen::Index dim, Eigen::Index num_labels,
                              const std::vector<std::pair<SparseEntries, int>>& records,
                              DatasetProvenance provenance = {});

  /// Dense rows; the constant feature must already be present in column 0.
  static Dataset from_dense(const Eigen::MatrixXd& inputs, const Eigen::VectorXi& labels,
                            Eigen::Index num_labels, DatasetProvenance provenance = {});

  Eigen::Index size() const { return labels_.size(); }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index num_labels() const { return num_labels_; }
  const InputMatrix& inputs() const { return inputs_; }
  const Eigen::VectorXi& labels() const { return labels_; }
  const DatasetProvenance& provenance() const { return provenance_; }

  Eigen::VectorXd input(Eigen::Index i) const;
  Eigen::MatrixXd dense_inputs() const;

  /// The dataset concatenated with itself `copies` times.
  Dataset repeated(int copies) const;

  /// FNV-1a over the canonical record encoding (dims, entries, labels).
  std::uint64_t hash() const;

 private:
  Eigen::Index dim_;
  Eigen::Index num_labels_;
  InputMatrix inputs_;
  Eigen::VectorXi labels_;
  DatasetProvenance provenance_;
};

// JSON-lines: a header {"d", "K", "seed", ...} then one {"x": [[j, v], ...], "y": k}
// per record, the constant feature stored explicitly at index 0.
void write_jsonl(const Dataset& ds, std::ostream& out);
Dataset read_jsonl(std::istream& in);
void write_jsonl_file(const Dataset& ds, const std::string& path);
Dataset read_jsonl_file(const std::string& path);

}  // namespace selfnorm
