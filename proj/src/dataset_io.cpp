#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "classbench/data.hpp"

namespace classbench {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == prefix;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) ++i;
      out.push_back(s[i]);
    }
    return out;
  }
  return std::string(s);
}

/// Splits on `sep` outside of single or double quotes; fields are trimmed and unquoted.
std::vector<std::string> split_fields(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  char quote = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || (line[i] == sep && quote == 0)) {
      out.push_back(unquote(line.substr(start, i - start)));
      start = i + 1;
    } else if (quote != 0 && line[i] == '\\') {
      ++i;
    } else if (line[i] == '\'' || line[i] == '"') {
      if (quote == 0) quote = line[i];
      else if (quote == line[i]) quote = 0;
    }
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Reads a leading name token (quoted or whitespace-delimited) and returns the rest.
std::pair<std::string, std::string_view> take_name(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s.empty()) throw ParseError(line, "expected a name");
  if (s.front() == '\'' || s.front() == '"') {
    const char q = s.front();
    std::size_t i = 1;
    std::string name;
    for (; i < s.size() && s[i] != q; ++i) {
      if (s[i] == '\\' && i + 1 < s.size()) ++i;
      name.push_back(s[i]);
    }
    if (i >= s.size()) throw ParseError(line, "unterminated quoted name");
    return {name, s.substr(i + 1)};
  }
  std::size_t i = 0;
  while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '{') ++i;
  return {std::string(s.substr(0, i)), s.substr(i)};
}

std::vector<std::string> parse_category_list(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '{' || s.back() != '}')
    throw ParseError(line, "malformed nominal category list");
  auto cats = split_fields(s.substr(1, s.size() - 2), ',');
  if (cats.size() == 1 && cats[0].empty()) throw ParseError(line, "empty nominal category list");
  for (std::size_t i = 0; i < cats.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (cats[i] == cats[j]) throw ParseError(line, "duplicate category '" + cats[i] + "'");
  return cats;
}

std::size_t resolve_class_index(std::optional<std::size_t> requested, std::size_t count) {
  const std::size_t idx = requested.value_or(count - 1);
  if (idx >= count)
    throw DataError("class index " + std::to_string(idx) + " out of range for " +
                    std::to_string(count) + " attributes");
  return idx;
}

double parse_cell(const std::string& token, const Attribute& attr, std::size_t line) {
  if (token == "?") return kMissing;
  if (attr.is_nominal()) {
    auto idx = attr.category_index(token);
    if (!idx)
      throw ParseError(line, "value '" + token + "' not declared for nominal attribute '" +
                                 attr.name + "'");
    return static_cast<double>(*idx);
  }
  auto v = parse_number(token);
  if (!v)
    throw ParseError(line, "invalid numeric value '" + token + "' for attribute '" +
                               attr.name + "'");
  return *v;
}

CellMatrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  CellMatrix cells(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c)
      cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return cells;
}

Dataset load_arff(std::istream& in, std::optional<std::size_t> class_index) {
  std::string relation = "relation";
  std::vector<Attribute> attrs;
  std::vector<std::vector<double>> rows;
  bool in_data = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(raw);
    if (s.empty() || s.front() == '%') continue;
    if (!in_data) {
      if (starts_with_ci(s, "@relation")) {
        relation = unquote(s.substr(9));
      } else if (starts_with_ci(s, "@attribute")) {
        auto [name, rest] = take_name(s.substr(10), line);
        rest = trim(rest);
        if (!rest.empty() && rest.front() == '{') {
          attrs.push_back(Attribute::nominal(name, parse_category_list(rest, line)));
        } else {
          const auto type = lower(rest);
          if (type != "numeric" && type != "real" && type != "integer")
            throw ParseError(line, "unsupported attribute type '" + std::string(rest) + "'");
          attrs.push_back(Attribute::numeric(name));
        }
      } else if (starts_with_ci(s, "@data")) {
        if (attrs.empty()) throw ParseError(line, "@data before any @attribute");
        in_data = true;
      } else {
        throw ParseError(line, "unexpected header line");
      }
      continue;
    }
    if (s.front() == '{') throw ParseError(line, "sparse ARFF rows are not supported");
    auto fields = split_fields(s, ',');
    if (fields.size() != attrs.size())
      throw ParseError(line, "expected " + std::to_string(attrs.size()) + " values, found " +
                                 std::to_string(fields.size()));
    std::vector<double> row(attrs.size());
    for (std::size_t a = 0; a < attrs.size(); ++a) row[a] = parse_cell(fields[a], attrs[a], line);
    rows.push_back(std::move(row));
  }
  if (!in_data) throw ParseError(line, "missing @data section");
  const auto cls = resolve_class_index(class_index, attrs.size());
  try {
    return Dataset(relation, attrs, cls, to_matrix(rows, attrs.size()));
  } catch (const ParseError&) {
    throw;
  } catch (const DataError& e) {
    throw ParseError(line, e.what());
  }
}

struct NominalDirective {
  std::string name;
  std::optional<std::vector<std::string>> categories;
};

std::vector<NominalDirective> parse_nominal_directive(std::string_view body, std::size_t line) {
  std::vector<NominalDirective> out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i < body.size() && body[i] == '{') ++depth;
    if (i < body.size() && body[i] == '}') --depth;
    if (i == body.size() || (body[i] == ';' && depth == 0)) {
      auto entry = trim(body.substr(start, i - start));
      start = i + 1;
      if (entry.empty()) continue;
      auto [name, rest] = take_name(entry, line);
      rest = trim(rest);
      NominalDirective d{name, std::nullopt};
      if (!rest.empty()) d.categories = parse_category_list(rest, line);
      out.push_back(std::move(d));
    }
  }
  return out;
}

Dataset load_csv(std::istream& in, std::optional<std::size_t> class_index) {
  std::string relation = "relation";
  std::vector<NominalDirective> directives;
  std::size_t directive_line = 0;
  std::vector<std::string> names;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> raw_rows;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '#') {
      const auto body = trim(s.substr(1));
      if (starts_with_ci(body, "nominal:")) {
        auto more = parse_nominal_directive(body.substr(8), line);
        directives.insert(directives.end(), more.begin(), more.end());
        directive_line = line;
      } else if (starts_with_ci(body, "relation:")) {
        relation = std::string(trim(body.substr(9)));
      }
      continue;
    }
    auto fields = split_fields(s, ',');
    if (names.empty()) {
      names = std::move(fields);
      continue;
    }
    if (fields.size() != names.size())
      throw ParseError(line, "expected " + std::to_string(names.size()) + " values, found " +
                                 std::to_string(fields.size()));
    raw_rows.emplace_back(line, std::move(fields));
  }
  if (names.empty()) throw ParseError(line, "missing CSV header row");
  const auto cls = resolve_class_index(class_index, names.size());

  std::vector<Attribute> attrs;
  for (const auto& n : names) attrs.push_back(Attribute::numeric(n));
  std::vector<bool> infer(names.size(), false);
  for (const auto& d : directives) {
    auto it = std::find(names.begin(), names.end(), d.name);
    if (it == names.end())
      throw ParseError(directive_line, "nominal directive names unknown column '" + d.name + "'");
    const auto a = static_cast<std::size_t>(it - names.begin());
    attrs[a].kind = AttributeKind::nominal;
    if (d.categories) attrs[a].categories = *d.categories;
    else infer[a] = true;
  }
  if (!attrs[cls].is_nominal()) {
    attrs[cls].kind = AttributeKind::nominal;
    infer[cls] = true;
  }
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    if (!infer[a]) continue;
    for (const auto& [ln, fields] : raw_rows)
      if (fields[a] != "?" && !attrs[a].category_index(fields[a]))
        attrs[a].categories.push_back(fields[a]);
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(raw_rows.size());
  for (const auto& [ln, fields] : raw_rows) {
    std::vector<double> row(attrs.size());
    for (std::size_t a = 0; a < attrs.size(); ++a) row[a] = parse_cell(fields[a], attrs[a], ln);
    rows.push_back(std::move(row));
  }
  try {
    return Dataset(relation, attrs, cls, to_matrix(rows, attrs.size()));
  } catch (const ParseError&) {
    throw;
  } catch (const DataError& e) {
    throw ParseError(line, e.what());
  }
}

std::string arff_name(const std::string& name) {
  const bool plain = !name.empty() && std::none_of(name.begin(), name.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '{' || c == '}' ||
           c == '\'' || c == '"' || c == '%' || c == '\\';
  });
  if (plain) return name;
  std::string out = "'";
  for (char c : name) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "'";
}

std::string cell_text(double v, const Attribute& attr) {
  if (is_missing(v)) return "?";
  if (attr.is_nominal()) return attr.categories[static_cast<std::size_t>(v)];
  return format_number(v);
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

DataFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = lower(path.extension().string());
  if (ext == ".arff") return DataFormat::arff;
  if (ext == ".csv") return DataFormat::csv;
  throw DataError("cannot infer dataset format from '" + path.string() +
                  "' (expected .arff or .csv)");
}

Dataset load_dataset(std::istream& in, DataFormat format,
                     std::optional<std::size_t> class_index) {
  return format == DataFormat::arff ? load_arff(in, class_index) : load_csv(in, class_index);
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<std::size_t> class_index) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return load_dataset(in, format_from_path(path), class_index);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

void write_dataset(std::ostream& out, const Dataset& d, DataFormat format) {
  const auto& attrs = d.attributes();
  if (format == DataFormat::arff) {
    out << "@relation " << arff_name(d.relation()) << "\n\n";
    for (const auto& a : attrs) {
      out << "@attribute " << arff_name(a.name) << ' ';
      if (a.is_nominal()) {
        out << '{';
        for (std::size_t c = 0; c < a.categories.size(); ++c)
          out << (c ? "," : "") << arff_name(a.categories[c]);
        out << '}';
      } else {
        out << "numeric";
      }
      out << '\n';
    }
    out << "\n@data\n";
  } else {
    out << "# relation: " << d.relation() << '\n';
    bool first = true;
    for (const auto& a : attrs) {
      if (!a.is_nominal()) continue;
      out << (first ? "# nominal: " : "; ") << a.name << " {";
      for (std::size_t c = 0; c < a.categories.size(); ++c)
        out << (c ? "," : "") << a.categories[c];
      out << '}';
      first = false;
    }
    if (!first) out << '\n';
    for (std::size_t a = 0; a < attrs.size(); ++a) out << (a ? "," : "") << attrs[a].name;
    out << '\n';
  }
  for (std::size_t r = 0; r < d.num_instances(); ++r) {
    for (std::size_t a = 0; a < attrs.size(); ++a) {
      const auto text = cell_text(d(r, a), attrs[a]);
      out << (a ? "," : "") << (format == DataFormat::arff ? arff_name(text) : text);
    }
    out << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_dataset(out, d, format_from_path(path));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace classbench
