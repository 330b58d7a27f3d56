#include "pcecal/ensemble.hpp"

#include "pcecal/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace pcecal {

namespace {

std::vector<double> row(const RowMatrix& m, Eigen::Index r) {
    return {m.data() + r * m.cols(), m.data() + (r + 1) * m.cols()};
}

}  // namespace

Design smolyak_design(const SparseGrid& grid) {
    Design d;
    d.nodes = grid.nodes();
    d.weights = grid.weights();
    d.kind = "smolyak";
    d.level = static_cast<int>(grid.level());
    return d;
}

Design random_design(std::size_t dim, std::size_t n, std::uint64_t seed) {
    require(dim >= 1 && n >= 1, ErrorCode::invalid_argument, "random design needs dim >= 1 and n >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Design d;
    d.kind = "random";
    d.seed = seed;
    d.nodes.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    std::set<std::vector<double>> seen;
    for (Eigen::Index q = 0; q < d.nodes.rows();) {
        for (Eigen::Index i = 0; i < d.nodes.cols(); ++i) d.nodes(q, i) = u(rng);
        if (seen.insert(row(d.nodes, q)).second) ++q;
    }
    return d;
}

DesignEnsemble::DesignEnsemble(RowMatrix nodes, Vector values, std::optional<Vector> weights,
                               std::vector<std::string> tags)
    : nodes_(std::move(nodes)), values_(std::move(values)), weights_(std::move(weights)), tags_(std::move(tags)) {
    require(nodes_.rows() >= 1, ErrorCode::invalid_argument, "ensemble needs at least one row");
    require(nodes_.cols() >= 1, ErrorCode::invalid_argument, "ensemble nodes need at least one coordinate");
    require(values_.size() == nodes_.rows(), ErrorCode::shape, "ensemble value count does not match node count");
    if (weights_)
        require(weights_->size() == nodes_.rows(), ErrorCode::shape,
                "ensemble weight count does not match node count");
    if (tags_.empty()) tags_.assign(size(), "");
    require(tags_.size() == size(), ErrorCode::shape, "ensemble tag count does not match node count");
    std::set<std::vector<double>> seen;
    for (Eigen::Index q = 0; q < nodes_.rows(); ++q) {
        require(std::isfinite(values_[q]), ErrorCode::numerical,
                "ensemble value at row " + std::to_string(q) + " is not finite");
        require(seen.insert(row(nodes_, q)).second, ErrorCode::invalid_argument,
                "ensemble row " + std::to_string(q) + " duplicates an earlier node");
    }
}

DesignEnsemble::DesignEnsemble(const Design& design, Vector values, std::vector<std::string> tags)
    : DesignEnsemble(design.nodes, std::move(values), design.weights, std::move(tags)) {}

DesignEnsemble DesignEnsemble::select(const std::vector<std::size_t>& rows) const {
    RowMatrix n(static_cast<Eigen::Index>(rows.size()), nodes_.cols());
    Vector v(static_cast<Eigen::Index>(rows.size()));
    std::vector<std::string> t;
    t.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] < size(), ErrorCode::invalid_argument, "ensemble row index out of range");
        const auto r = static_cast<Eigen::Index>(rows[i]);
        n.row(static_cast<Eigen::Index>(i)) = nodes_.row(r);
        v[static_cast<Eigen::Index>(i)] = values_[r];
        t.push_back(tags_[rows[i]]);
    }
    return {std::move(n), std::move(v), std::nullopt, std::move(t)};
}

DesignEnsemble DesignEnsemble::restrict_to(const RowMatrix& nodes, const std::optional<Vector>& weights) const {
    require(nodes.cols() == nodes_.cols(), ErrorCode::shape, "node width mismatch");
    std::map<std::vector<double>, std::size_t> lookup;
    for (Eigen::Index q = 0; q < nodes_.rows(); ++q) lookup.emplace(row(nodes_, q), static_cast<std::size_t>(q));
    std::vector<std::size_t> rows;
    rows.reserve(static_cast<std::size_t>(nodes.rows()));
    for (Eigen::Index q = 0; q < nodes.rows(); ++q) {
        const auto it = lookup.find(row(nodes, q));
        if (it == lookup.end())
            fail(ErrorCode::precondition, "ensemble has no row for requested node " + std::to_string(q));
        rows.push_back(it->second);
    }
    DesignEnsemble out = select(rows);
    out.weights_ = weights;
    if (weights) require(weights->size() == nodes.rows(), ErrorCode::shape, "weight count mismatch");
    return out;
}

}  // namespace pcecal
