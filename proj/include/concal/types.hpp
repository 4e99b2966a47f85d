#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace concal {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;

// Bad user input: shapes, ranges, unreadable files. Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionError : public InputError {
public:
    using InputError::InputError;
};

// A computation produced something that violates its own invariants. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// n items (rows) x p attributes (columns).
struct DataMatrix {
    RowMatrix values;
    std::vector<std::string> item_ids;
    std::vector<std::string> attribute_ids;

    DataMatrix() = default;

    explicit DataMatrix(RowMatrix v) : values(std::move(v)) {
        for (Eigen::Index i = 0; i < values.rows(); ++i) item_ids.push_back("item" + std::to_string(i + 1));
        for (Eigen::Index j = 0; j < values.cols(); ++j) attribute_ids.push_back("var" + std::to_string(j + 1));
    }

    DataMatrix(RowMatrix v, std::vector<std::string> items, std::vector<std::string> attributes)
        : values(std::move(v)), item_ids(std::move(items)), attribute_ids(std::move(attributes)) {}

    int n() const { return static_cast<int>(values.rows()); }
    int p() const { return static_cast<int>(values.cols()); }

    void validate() const {
        if (values.rows() < 2) throw InputError("data matrix needs at least 2 items");
        if (values.cols() < 1) throw InputError("data matrix needs at least 1 attribute");
        if (static_cast<Eigen::Index>(item_ids.size()) != values.rows() ||
            static_cast<Eigen::Index>(attribute_ids.size()) != values.cols())
            throw DimensionError("data matrix ids do not match its shape");
        if (!values.allFinite()) throw InputError("data matrix contains non-finite values");
    }

    // Rows `rows` of this matrix, ids carried along.
    DataMatrix subset(const std::vector<int>& rows) const {
        DataMatrix out;
        out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out.values.row(static_cast<Eigen::Index>(r)) = values.row(rows[r]);
            out.item_ids.push_back(item_ids[static_cast<std::size_t>(rows[r])]);
        }
        out.attribute_ids = attribute_ids;
        return out;
    }
};

// Symmetric, zero diagonal, non-negative, finite.
struct DistanceMatrix {
    Eigen::MatrixXd values;

    DistanceMatrix() = default;
    explicit DistanceMatrix(Eigen::MatrixXd v) : values(std::move(v)) { check(); }

    int n() const { return static_cast<int>(values.rows()); }
    double operator()(int i, int j) const { return values(i, j); }

    void check() const {
        const Eigen::Index n = values.rows();
        if (values.cols() != n) throw DimensionError("distance matrix is not square");
        for (Eigen::Index i = 0; i < n; ++i) {
            if (values(i, i) != 0.0) throw NumericalError("distance matrix has a non-zero diagonal");
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double d = values(i, j);
                if (!std::isfinite(d) || d < 0.0) throw NumericalError("distance matrix has a negative or non-finite entry");
                if (d != values(j, i)) throw NumericalError("distance matrix is not symmetric");
            }
        }
    }
};

// Labels are 1..G, numbered by order of first occurrence.
struct ClusterAssignment {
    std::vector<int> labels;
    int num_clusters = 0;

    int n() const { return static_cast<int>(labels.size()); }

    // Relabels arbitrary integer labels by first occurrence.
    static ClusterAssignment from_labels(const std::vector<int>& raw) {
        ClusterAssignment out;
        out.labels.resize(raw.size());
        std::vector<std::pair<int, int>> seen;  // raw -> new
        for (std::size_t i = 0; i < raw.size(); ++i) {
            int id = 0;
            for (const auto& [r, mapped] : seen)
                if (r == raw[i]) { id = mapped; break; }
            if (id == 0) {
                id = static_cast<int>(seen.size()) + 1;
                seen.emplace_back(raw[i], id);
            }
            out.labels[i] = id;
        }
        out.num_clusters = static_cast<int>(seen.size());
        return out;
    }

    void validate() const {
        if (num_clusters < 1) throw InputError("assignment has no clusters");
        std::vector<int> sizes(static_cast<std::size_t>(num_clusters), 0);
        for (int l : labels) {
            if (l < 1 || l > num_clusters) throw InputError("cluster label out of range");
            ++sizes[static_cast<std::size_t>(l - 1)];
        }
        for (int s : sizes)
            if (s == 0) throw InputError("assignment has an empty cluster");
    }
};

}  // namespace concal
