#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace classbench {

/// Cells are stored as doubles: numeric values as-is, nominal values as
/// their category index, and missing values as quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double cell) noexcept { return std::isnan(cell); }

using CellMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class AttributeKind { numeric, nominal };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  std::vector<std::string> categories;

  static Attribute numeric(std::string name);
  static Attribute nominal(std::string name, std::vector<std::string> categories);

  bool is_nominal() const noexcept { return kind == AttributeKind::nominal; }
  std::size_t category_count() const noexcept { return categories.size(); }
  std::optional<std::size_t> category_index(std::string_view value) const;

  bool operator==(const Attribute&) const = default;
};

/// A table of instances over a fixed schema. One attribute is the class and
/// must be nominal. Values are immutable; transformations return new sets.
class Dataset {
 public:
  Dataset(std::string relation, std::vector<Attribute> attributes,
          std::size_t class_index, CellMatrix cells);

  const std::string& relation() const noexcept { return relation_; }
  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
  const Attribute& attribute(std::size_t a) const { return attributes_.at(a); }
  std::size_t class_index() const noexcept { return class_index_; }
  const Attribute& class_attribute() const { return attributes_[class_index_]; }
  std::size_t num_classes() const { return class_attribute().category_count(); }

  std::size_t num_instances() const noexcept { return static_cast<std::size_t>(cells_.rows()); }
  std::size_t num_attributes() const noexcept { return attributes_.size(); }

  double operator()(std::size_t row, std::size_t a) const { return cells_(row, a); }
  bool missing(std::size_t row, std::size_t a) const { return is_missing(cells_(row, a)); }
  std::span<const double> instance(std::size_t row) const {
    return {cells_.row(static_cast<Eigen::Index>(row)).data(), num_attributes()};
  }
  /// Class index of a row, empty when the class cell is missing.
  std::optional<std::size_t> class_of(std::size_t row) const;

  const CellMatrix& cells() const noexcept { return cells_; }

  bool has_missing() const;
  Dataset with_cells(CellMatrix cells) const;
  Dataset select(std::span<const std::size_t> rows) const;

  bool operator==(const Dataset& other) const;

 private:
  std::string relation_;
  std::vector<Attribute> attributes_;
  std::size_t class_index_;
  CellMatrix cells_;
};

enum class DataFormat { arff, csv };

DataFormat format_from_path(const std::filesystem::path& path);

/// Parses ARFF (relation/attribute/data subset, '%' comments) or CSV (header
/// row, optional "# nominal:" directive). '?' marks a missing cell. When
/// class_index is empty the last attribute is the class.
Dataset load_dataset(std::istream& in, DataFormat format,
                     std::optional<std::size_t> class_index = {});
Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<std::size_t> class_index = {});

void write_dataset(std::ostream& out, const Dataset& d, DataFormat format);
void save_dataset(const std::filesystem::path& path, const Dataset& d);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

/// Per-attribute min-max statistics fitted on one dataset and applicable to
/// another with the same schema. Nominal and class attributes are skipped.
struct MinMaxScaling {
  std::vector<double> min;
  std::vector<double> range;  // 0 for nominal, class, constant or unobserved
  std::vector<bool> active;
};

MinMaxScaling fit_min_max(const Dataset& d);
Dataset apply_min_max(const MinMaxScaling& scaling, const Dataset& d);
/// Rescales every numeric non-class attribute to [0,1]; constant columns map to 0.
Dataset normalize(const Dataset& d);

/// Replaces each non-class nominal attribute by 0/1 indicators: one
/// indicator for two categories, one per category otherwise.
Dataset nominal_to_binary(const Dataset& d);

struct FoldSplit {
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return folds.size(); }
  std::vector<std::size_t> training_indices(std::size_t fold) const;
};

FoldSplit stratified_folds(const Dataset& d, std::size_t k, std::uint64_t seed);

/// Keeps the rows whose class is observed, in their original order.
Dataset drop_missing_class(const Dataset& d);

}  // namespace classbench
