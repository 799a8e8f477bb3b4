#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sufaudit {

enum class ColumnKind { Binary, Real, Categorical };

const char* to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& text);

inline bool is_missing(double v) { return std::isnan(v); }
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// One typed column. Missing cells are NaN. Categorical cells hold the index
/// of their level in `levels`.
struct Column {
  ColumnKind kind = ColumnKind::Real;
  std::vector<double> values;
  std::vector<std::string> levels;
  bool latent = false;

  std::size_t missing_count() const;
  bool numeric() const { return kind != ColumnKind::Categorical; }

  static Column binary(std::vector<double> values);
  static Column real(std::vector<double> values);
};

/// Column table of units. Immutable once built; every transformation returns
/// a new Dataset.
class Dataset {
 public:
  Dataset() = default;
  /// Validates equal column lengths, binary domains and unit-id uniqueness
  /// (within period when a period column is set).
  explicit Dataset(std::vector<std::pair<std::string, Column>> columns,
                   std::optional<std::string> unit_id = std::nullopt,
                   std::optional<std::string> period = std::nullopt);

  std::size_t rows() const { return rows_; }
  const std::vector<std::string>& names() const { return names_; }
  bool has(const std::string& name) const { return index_.count(name) != 0; }
  const Column& column(const std::string& name) const;
  const std::optional<std::string>& unit_id() const { return unit_id_; }
  const std::optional<std::string>& period() const { return period_; }

  /// Adds or replaces a column.
  Dataset with_column(const std::string& name, Column column) const;
  Dataset select_rows(std::span<const std::size_t> rows) const;
  Dataset without_latent() const;

  /// Listwise deletion over `columns`: returns the complete rows and the
  /// number of rows dropped.
  std::pair<Dataset, std::size_t> complete_cases(const std::vector<std::string>& columns) const;

 private:
  std::vector<std::string> names_;
  std::vector<Column> columns_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t rows_ = 0;
  std::optional<std::string> unit_id_;
  std::optional<std::string> period_;
};

using Schema = std::vector<std::pair<std::string, ColumnKind>>;

/// Read an RFC-4180 CSV with a header row. Only schema columns are loaded;
/// header columns outside the schema are ignored. Empty cells are missing;
/// unparseable real cells become missing; a binary cell other than 0, 1 or
/// empty is an error naming its row and column.
Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 std::optional<std::string> unit_id = std::nullopt,
                 std::optional<std::string> period = std::nullopt);
Dataset parse_csv(const std::string& text, const Schema& schema,
                  std::optional<std::string> unit_id = std::nullopt,
                  std::optional<std::string> period = std::nullopt);

/// Serialize with shortest round-trip number formatting.
std::string to_csv(const Dataset& data);
void write_csv(const Dataset& data, const std::filesystem::path& path);

enum class SufficiencyDirection { AtOrAbove, Below };

struct SufficiencyThreshold {
  std::string column;
  double cutoff = 0.0;
  SufficiencyDirection direction = SufficiencyDirection::AtOrAbove;
};

std::string sufficiency_column_name(const std::string& column);

/// Adds `<column>_sufficient`: 1 when the cell meets the cutoff in the given
/// direction (at-or-above uses >=), missing stays missing.
Dataset binarize_sufficiency(const Dataset& data, const SufficiencyThreshold& threshold);

enum class Combiner { AllOf, AnyOf };

/// Collapse several binary indicators into one. Any missing input makes the
/// combined cell missing.
Dataset combine_indicators(const Dataset& data, const std::string& name,
                           const std::vector<std::string>& columns, Combiner combiner);

/// Adjustment columns for the four identification tasks: C1 for selection,
/// C2 for the independence test, C3 for the macro effect, C4 for wellbeing.
struct Confounders {
  std::vector<std::string> selection;
  std::vector<std::string> independence;
  std::vector<std::string> macro;
  std::vector<std::string> wellbeing;
};

struct RoleBinding {
  std::string treatment;
  std::optional<std::string> macro_pre;
  std::optional<std::string> macro_post;
  std::optional<std::string> wellbeing_pre;
  std::optional<std::string> wellbeing_post;
  Confounders confounders;
  std::optional<std::string> instrument;
  std::vector<std::string> covariates;
};

enum class ViolationKind { MissingColumn, NonBinaryRole, NonNumericColumn, ConstantTreatment, MissingValues };

struct BindingViolation {
  ViolationKind kind;
  std::string column;
  std::string message;
  std::size_t count = 0;
};

const char* to_string(ViolationKind kind);

/// Every problem that would stop the binding from being audited. Rows with
/// missing role values are reported (with their count) but only block the
/// rows concerned, which each audit drops listwise.
std::vector<BindingViolation> validate_binding(const Dataset& data, const RoleBinding& binding);

}  // namespace sufaudit
