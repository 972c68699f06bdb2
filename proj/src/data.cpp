#include "classbench/data.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "classbench/random.hpp"

namespace classbench {

ParseError::ParseError(std::size_t line, const std::string& what)
    : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

Attribute Attribute::numeric(std::string name) {
  return Attribute{std::move(name), AttributeKind::numeric, {}};
}

Attribute Attribute::nominal(std::string name, std::vector<std::string> categories) {
  return Attribute{std::move(name), AttributeKind::nominal, std::move(categories)};
}

std::optional<std::size_t> Attribute::category_index(std::string_view value) const {
  auto it = std::find(categories.begin(), categories.end(), value);
  if (it == categories.end()) return std::nullopt;
  return static_cast<std::size_t>(it - categories.begin());
}

Dataset::Dataset(std::string relation, std::vector<Attribute> attributes,
                 std::size_t class_index, CellMatrix cells)
    : relation_(std::move(relation)),
      attributes_(std::move(attributes)),
      class_index_(class_index),
      cells_(std::move(cells)) {
  if (attributes_.empty()) throw DataError("dataset has no attributes");
  if (class_index_ >= attributes_.size())
    throw DataError("class index " + std::to_string(class_index_) + " out of range");
  if (static_cast<std::size_t>(cells_.cols()) != attributes_.size())
    throw DataError("cell matrix has " + std::to_string(cells_.cols()) +
                    " columns, schema has " + std::to_string(attributes_.size()));
  for (const auto& a : attributes_) {
    if (!a.is_nominal()) continue;
    if (a.categories.empty())
      throw DataError("nominal attribute '" + a.name + "' has no categories");
    std::set<std::string> seen(a.categories.begin(), a.categories.end());
    if (seen.size() != a.categories.size())
      throw DataError("nominal attribute '" + a.name + "' has duplicate categories");
  }
  const auto& cls = attributes_[class_index_];
  if (!cls.is_nominal() || cls.category_count() < 2)
    throw DataError("class attribute '" + cls.name +
                    "' must be nominal with at least two categories");
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    if (!attributes_[a].is_nominal()) continue;
    const auto count = static_cast<double>(attributes_[a].category_count());
    for (Eigen::Index r = 0; r < cells_.rows(); ++r) {
      const double v = cells_(r, static_cast<Eigen::Index>(a));
      if (is_missing(v)) continue;
      if (v < 0 || v >= count || v != std::floor(v))
        throw DataError("row " + std::to_string(r) + ": invalid category for '" +
                        attributes_[a].name + "'");
    }
  }
}

std::optional<std::size_t> Dataset::class_of(std::size_t row) const {
  const double v = cells_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(class_index_));
  if (is_missing(v)) return std::nullopt;
  return static_cast<std::size_t>(v);
}

bool Dataset::has_missing() const { return cells_.array().isNaN().any(); }

Dataset Dataset::with_cells(CellMatrix cells) const {
  return Dataset(relation_, attributes_, class_index_, std::move(cells));
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  CellMatrix out(static_cast<Eigen::Index>(rows.size()), cells_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = cells_.row(static_cast<Eigen::Index>(rows[i]));
  return with_cells(std::move(out));
}

bool Dataset::operator==(const Dataset& other) const {
  if (relation_ != other.relation_ || attributes_ != other.attributes_ ||
      class_index_ != other.class_index_ || cells_.rows() != other.cells_.rows())
    return false;
  for (Eigen::Index r = 0; r < cells_.rows(); ++r)
    for (Eigen::Index c = 0; c < cells_.cols(); ++c) {
      const double a = cells_(r, c), b = other.cells_(r, c);
      if (is_missing(a) != is_missing(b)) return false;
      if (!is_missing(a) && a != b) return false;
    }
  return true;
}

MinMaxScaling fit_min_max(const Dataset& d) {
  const std::size_t A = d.num_attributes();
  MinMaxScaling s{std::vector<double>(A, 0.0), std::vector<double>(A, 0.0),
                  std::vector<bool>(A, false)};
  for (std::size_t a = 0; a < A; ++a) {
    if (a == d.class_index() || d.attribute(a).is_nominal()) continue;
    s.active[a] = true;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 0; r < d.num_instances(); ++r) {
      const double v = d(r, a);
      if (is_missing(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo > hi) {
      // column entirely missing
      s.active[a] = false;
      continue;
    }
    s.min[a] = lo;
    s.range[a] = hi - lo;
  }
  return s;
}

Dataset apply_min_max(const MinMaxScaling& s, const Dataset& d) {
  if (s.min.size() != d.num_attributes())
    throw DataError("scaling was fitted on a different schema");
  CellMatrix cells = d.cells();
  for (std::size_t a = 0; a < d.num_attributes(); ++a) {
    if (!s.active[a]) continue;
    auto col = cells.col(static_cast<Eigen::Index>(a));
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      if (is_missing(col(r))) continue;
      col(r) = s.range[a] > 0.0 ? (col(r) - s.min[a]) / s.range[a] : 0.0;
    }
  }
  return d.with_cells(std::move(cells));
}

Dataset normalize(const Dataset& d) { return apply_min_max(fit_min_max(d), d); }

Dataset nominal_to_binary(const Dataset& d) {
  std::vector<Attribute> attrs;
  // (source attribute, category or -1 for a copy)
  std::vector<std::pair<std::size_t, long>> sources;
  std::size_t class_index = 0;
  for (std::size_t a = 0; a < d.num_attributes(); ++a) {
    const auto& attr = d.attribute(a);
    if (a == d.class_index() || !attr.is_nominal()) {
      if (a == d.class_index()) class_index = attrs.size();
      attrs.push_back(attr);
      sources.emplace_back(a, -1);
    } else if (attr.category_count() <= 2) {
      const std::size_t cat = attr.category_count() - 1;
      attrs.push_back(Attribute::numeric(attr.name + "=" + attr.categories[cat]));
      sources.emplace_back(a, static_cast<long>(cat));
    } else {
      for (std::size_t c = 0; c < attr.category_count(); ++c) {
        attrs.push_back(Attribute::numeric(attr.name + "=" + attr.categories[c]));
        sources.emplace_back(a, static_cast<long>(c));
      }
    }
  }
  const bool unchanged = std::all_of(sources.begin(), sources.end(),
                                     [](const auto& s) { return s.second < 0; });
  if (unchanged) return d;

  CellMatrix cells(d.cells().rows(), static_cast<Eigen::Index>(attrs.size()));
  for (Eigen::Index r = 0; r < cells.rows(); ++r) {
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const auto [a, cat] = sources[j];
      const double v = d(static_cast<std::size_t>(r), a);
      double out = v;
      if (cat >= 0 && !is_missing(v)) out = (static_cast<long>(v) == cat) ? 1.0 : 0.0;
      cells(r, static_cast<Eigen::Index>(j)) = out;
    }
  }
  return Dataset(d.relation(), std::move(attrs), class_index, std::move(cells));
}

std::vector<std::size_t> FoldSplit::training_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f)
    if (f != fold) out.insert(out.end(), folds[f].begin(), folds[f].end());
  std::sort(out.begin(), out.end());
  return out;
}

FoldSplit stratified_folds(const Dataset& d, std::size_t k, std::uint64_t seed) {
  const std::size_t n = d.num_instances();
  if (k < 2) throw DataError("fold count must be at least 2");
  if (k > n)
    throw DataError("fold count " + std::to_string(k) + " exceeds instance count " +
                    std::to_string(n));
  std::vector<std::vector<std::size_t>> by_class(d.num_classes());
  for (std::size_t r = 0; r < n; ++r) {
    auto c = d.class_of(r);
    if (!c)
      throw DataError("row " + std::to_string(r) +
                      " has a missing class; apply drop_missing_class first");
    by_class[*c].push_back(r);
  }
  Rng rng(seed);
  FoldSplit split{std::vector<std::vector<std::size_t>>(k), seed};
  std::size_t position = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (auto r : members) split.folds[position++ % k].push_back(r);
  }
  for (auto& f : split.folds) std::sort(f.begin(), f.end());
  return split;
}

Dataset drop_missing_class(const Dataset& d) {
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < d.num_instances(); ++r)
    if (d.class_of(r)) keep.push_back(r);
  if (keep.empty()) throw DataError("every instance has a missing class value");
  if (keep.size() == d.num_instances()) return d;
  return d.select(keep);
}

}  // namespace classbench
