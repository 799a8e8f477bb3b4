#include "sufaudit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "sufaudit/errors.hpp"

namespace sufaudit {

const char* to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Binary: return "binary";
    case ColumnKind::Real: return "real";
    case ColumnKind::Categorical: return "categorical";
  }
  return "?";
}

ColumnKind column_kind_from_string(const std::string& text) {
  if (text == "binary") return ColumnKind::Binary;
  if (text == "real") return ColumnKind::Real;
  if (text == "categorical") return ColumnKind::Categorical;
  throw DataError("unknown column kind '" + text + "' (expected binary, real or categorical)");
}

std::size_t Column::missing_count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), is_missing));
}

Column Column::binary(std::vector<double> values) {
  return Column{ColumnKind::Binary, std::move(values), {}, false};
}

Column Column::real(std::vector<double> values) {
  return Column{ColumnKind::Real, std::move(values), {}, false};
}

Dataset::Dataset(std::vector<std::pair<std::string, Column>> columns, std::optional<std::string> unit_id,
                 std::optional<std::string> period)
    : unit_id_(std::move(unit_id)), period_(std::move(period)) {
  for (auto& [name, col] : columns) {
    if (!index_.emplace(name, names_.size()).second) throw DataError("duplicate column '" + name + "'");
    if (names_.empty()) {
      rows_ = col.values.size();
    } else if (col.values.size() != rows_) {
      throw DataError("column '" + name + "' has " + std::to_string(col.values.size()) + " rows, expected " +
                      std::to_string(rows_));
    }
    if (col.kind == ColumnKind::Binary) {
      for (std::size_t r = 0; r < col.values.size(); ++r) {
        const double v = col.values[r];
        if (!is_missing(v) && v != 0.0 && v != 1.0) {
          throw DataError("binary column '" + name + "' holds " + std::to_string(v) + " at row " +
                          std::to_string(r + 1));
        }
      }
    }
    names_.push_back(name);
    columns_.push_back(std::move(col));
  }
  if (period_ && !has(*period_)) throw DataError("period column '" + *period_ + "' not present");
  if (unit_id_) {
    if (!has(*unit_id_)) throw DataError("unit id column '" + *unit_id_ + "' not present");
    const Column& id = column(*unit_id_);
    const Column* per = period_ ? &column(*period_) : nullptr;
    std::set<std::pair<double, double>> seen;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double p = per ? per->values[r] : 0.0;
      if (is_missing(id.values[r])) continue;
      if (!seen.emplace(id.values[r], p).second) {
        throw DataError("unit id repeated within a period at row " + std::to_string(r + 1));
      }
    }
  }
}

const Column& Dataset::column(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw DataError("unknown column '" + name + "'");
  return columns_[it->second];
}

Dataset Dataset::with_column(const std::string& name, Column column) const {
  std::vector<std::pair<std::string, Column>> cols;
  cols.reserve(names_.size() + 1);
  bool replaced = false;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) {
      cols.emplace_back(name, std::move(column));
      replaced = true;
    } else {
      cols.emplace_back(names_[i], columns_[i]);
    }
  }
  if (!replaced) cols.emplace_back(name, std::move(column));
  return Dataset(std::move(cols), unit_id_, period_);
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset out;
  out.names_ = names_;
  out.index_ = index_;
  out.unit_id_ = unit_id_;
  out.period_ = period_;
  out.rows_ = rows.size();
  out.columns_.reserve(columns_.size());
  for (const Column& c : columns_) {
    Column picked{c.kind, {}, c.levels, c.latent};
    picked.values.reserve(rows.size());
    for (std::size_t r : rows) picked.values.push_back(c.values.at(r));
    out.columns_.push_back(std::move(picked));
  }
  return out;
}

Dataset Dataset::without_latent() const {
  std::vector<std::pair<std::string, Column>> cols;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!columns_[i].latent) cols.emplace_back(names_[i], columns_[i]);
  }
  return Dataset(std::move(cols), unit_id_, period_);
}

std::pair<Dataset, std::size_t> Dataset::complete_cases(const std::vector<std::string>& columns) const {
  std::vector<const Column*> used;
  for (const auto& name : columns) used.push_back(&column(name));
  std::vector<std::size_t> keep;
  keep.reserve(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (std::none_of(used.begin(), used.end(), [r](const Column* c) { return is_missing(c->values[r]); })) {
      keep.push_back(r);
    }
  }
  const std::size_t dropped = rows_ - keep.size();
  if (dropped == 0) return {*this, 0};
  return {select_rows(keep), dropped};
}

namespace {

// RFC-4180 record splitter. Returns false at end of input.
bool next_record(const std::string& text, std::size_t& pos, std::vector<std::string>& fields, std::size_t line) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field += '"';
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      field += c;
      ++pos;
      continue;
    }
    if (c == '"' && field.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
      ++pos;
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
      ++pos;
      continue;
    }
    if (c == '\r' || c == '\n') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      fields.push_back(std::move(field));
      return true;
    }
    field += c;
    ++pos;
  }
  if (quoted) throw DataError("unterminated quoted field starting on line " + std::to_string(line));
  fields.push_back(std::move(field));
  return true;
}

std::string_view trim_ws(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view s) {
  s = trim_ws(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Dataset parse_csv(const std::string& text, const Schema& schema, std::optional<std::string> unit_id,
                  std::optional<std::string> period) {
  std::size_t pos = 0;
  std::vector<std::string> header;
  if (!next_record(text, pos, header, 1) || (header.size() == 1 && header[0].empty())) {
    throw DataError("CSV has no header row");
  }
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  for (auto& h : header) h = std::string(trim_ws(h));

  std::vector<std::size_t> source(schema.size());
  for (std::size_t k = 0; k < schema.size(); ++k) {
    auto it = std::find(header.begin(), header.end(), schema[k].first);
    if (it == header.end()) {
      throw DataError("schema column '" + schema[k].first + "' is not in the CSV header");
    }
    source[k] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<Column> cols(schema.size());
  std::vector<std::unordered_map<std::string, std::size_t>> level_index(schema.size());
  for (std::size_t k = 0; k < schema.size(); ++k) cols[k].kind = schema[k].second;

  std::vector<std::string> fields;
  std::size_t record = 1;
  while (next_record(text, pos, fields, record + 1)) {
    ++record;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != header.size()) {
      throw DataError("row " + std::to_string(record) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t k = 0; k < schema.size(); ++k) {
      const std::string& cell = fields[source[k]];
      Column& col = cols[k];
      const std::string_view trimmed = trim_ws(cell);
      if (trimmed.empty()) {
        col.values.push_back(kMissing);
        continue;
      }
      switch (col.kind) {
        case ColumnKind::Binary: {
          const auto v = parse_number(trimmed);
          if (!v || (*v != 0.0 && *v != 1.0)) {
            throw DataError("row " + std::to_string(record) + ", column '" + schema[k].first +
                            "': binary value expected, got '" + cell + "'");
          }
          col.values.push_back(*v);
          break;
        }
        case ColumnKind::Real:
          col.values.push_back(parse_number(trimmed).value_or(kMissing));
          break;
        case ColumnKind::Categorical: {
          std::string key(trimmed);
          auto [it, inserted] = level_index[k].emplace(key, col.levels.size());
          if (inserted) col.levels.push_back(key);
          col.values.push_back(static_cast<double>(it->second));
          break;
        }
      }
    }
  }

  std::vector<std::pair<std::string, Column>> named;
  for (std::size_t k = 0; k < schema.size(); ++k) named.emplace_back(schema[k].first, std::move(cols[k]));
  return Dataset(std::move(named), std::move(unit_id), std::move(period));
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema, std::optional<std::string> unit_id,
                 std::optional<std::string> period) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, std::move(unit_id), std::move(period));
}

std::string to_csv(const Dataset& data) {
  std::string out;
  const auto& names = data.names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += quote_if_needed(names[i]);
  }
  out += '\n';
  std::vector<const Column*> cols;
  for (const auto& n : names) cols.push_back(&data.column(n));
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ',';
      const double v = cols[i]->values[r];
      if (is_missing(v)) continue;
      if (cols[i]->kind == ColumnKind::Categorical) {
        out += quote_if_needed(cols[i]->levels.at(static_cast<std::size_t>(v)));
      } else {
        out += format_number(v);
      }
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write CSV file '" + path.string() + "'");
  out << to_csv(data);
}

std::string sufficiency_column_name(const std::string& column) { return column + "_sufficient"; }

Dataset binarize_sufficiency(const Dataset& data, const SufficiencyThreshold& threshold) {
  if (!std::isfinite(threshold.cutoff)) throw DataError("sufficiency cutoff must be finite");
  const Column& src = data.column(threshold.column);
  if (!src.numeric()) {
    throw DataError("column '" + threshold.column + "' is categorical; sufficiency needs a numeric column");
  }
  std::vector<double> out;
  out.reserve(src.values.size());
  for (double v : src.values) {
    if (is_missing(v)) {
      out.push_back(kMissing);
    } else if (threshold.direction == SufficiencyDirection::AtOrAbove) {
      out.push_back(v >= threshold.cutoff ? 1.0 : 0.0);
    } else {
      out.push_back(v < threshold.cutoff ? 1.0 : 0.0);
    }
  }
  return data.with_column(sufficiency_column_name(threshold.column), Column::binary(std::move(out)));
}

Dataset combine_indicators(const Dataset& data, const std::string& name, const std::vector<std::string>& columns,
                           Combiner combiner) {
  if (columns.empty()) throw DataError("combine_indicators needs at least one column");
  std::vector<const Column*> cols;
  for (const auto& c : columns) {
    const Column& col = data.column(c);
    if (col.kind != ColumnKind::Binary) throw DataError("column '" + c + "' is not binary");
    cols.push_back(&col);
  }
  std::vector<double> out(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    bool any_missing = false;
    bool all = true;
    bool any = false;
    for (const Column* c : cols) {
      const double v = c->values[r];
      if (is_missing(v)) {
        any_missing = true;
        continue;
      }
      all = all && v == 1.0;
      any = any || v == 1.0;
    }
    if (any_missing) {
      out[r] = kMissing;
    } else {
      out[r] = (combiner == Combiner::AllOf ? all : any) ? 1.0 : 0.0;
    }
  }
  return data.with_column(name, Column::binary(std::move(out)));
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::MissingColumn: return "missing_column";
    case ViolationKind::NonBinaryRole: return "non_binary_role";
    case ViolationKind::NonNumericColumn: return "non_numeric_column";
    case ViolationKind::ConstantTreatment: return "constant_treatment";
    case ViolationKind::MissingValues: return "missing_values";
  }
  return "?";
}

std::vector<BindingViolation> validate_binding(const Dataset& data, const RoleBinding& b) {
  std::vector<BindingViolation> out;
  std::vector<std::string> role_columns;

  auto require_binary = [&](const std::string& role, const std::string& col) {
    role_columns.push_back(col);
    if (!data.has(col)) {
      out.push_back({ViolationKind::MissingColumn, col, role + " column '" + col + "' not found", 0});
      return false;
    }
    if (data.column(col).kind != ColumnKind::Binary) {
      out.push_back({ViolationKind::NonBinaryRole, col, role + " column '" + col + "' is not binary", 0});
      return false;
    }
    return true;
  };
  auto require_present = [&](const std::string& role, const std::string& col, bool numeric) {
    role_columns.push_back(col);
    if (!data.has(col)) {
      out.push_back({ViolationKind::MissingColumn, col, role + " column '" + col + "' not found", 0});
    } else if (numeric && !data.column(col).numeric()) {
      out.push_back({ViolationKind::NonNumericColumn, col, role + " column '" + col + "' is not numeric", 0});
    }
  };

  if (require_binary("treatment", b.treatment)) {
    std::size_t treated = 0;
    std::size_t untreated = 0;
    for (double v : data.column(b.treatment).values) {
      if (v == 1.0) ++treated;
      if (v == 0.0) ++untreated;
    }
    if (treated == 0) out.push_back({ViolationKind::ConstantTreatment, b.treatment, "no treated units", 0});
    if (untreated == 0) out.push_back({ViolationKind::ConstantTreatment, b.treatment, "no untreated units", 0});
  }
  if (b.macro_pre) require_binary("macro_pre", *b.macro_pre);
  if (b.macro_post) require_binary("macro_post", *b.macro_post);
  if (b.wellbeing_pre) require_binary("wellbeing_pre", *b.wellbeing_pre);
  if (b.wellbeing_post) require_binary("wellbeing_post", *b.wellbeing_post);
  if (b.instrument) require_binary("instrument", *b.instrument);
  for (const auto& c : b.confounders.selection) require_present("C1 confounder", c, false);
  for (const auto& c : b.confounders.independence) require_present("C2 confounder", c, true);
  for (const auto& c : b.confounders.macro) require_present("C3 confounder", c, false);
  for (const auto& c : b.confounders.wellbeing) require_present("C4 confounder", c, false);
  for (const auto& c : b.covariates) require_present("covariate", c, true);

  std::vector<const Column*> present;
  std::set<std::string> unique(role_columns.begin(), role_columns.end());
  for (const auto& c : unique) {
    if (data.has(c)) present.push_back(&data.column(c));
  }
  std::size_t incomplete = 0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    if (std::any_of(present.begin(), present.end(), [r](const Column* c) { return is_missing(c->values[r]); })) {
      ++incomplete;
    }
  }
  if (incomplete > 0) {
    out.push_back({ViolationKind::MissingValues, "",
                   std::to_string(incomplete) + " rows have missing values in bound roles", incomplete});
  }
  return out;
}

}  // namespace sufaudit
