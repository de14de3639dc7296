#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "lpwfcm/dataset.hpp"
#include "lpwfcm/error.hpp"

namespace lpwfcm {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == prefix;
}

[[noreturn]] inline void fail_at(ErrorKind kind, std::size_t line, const std::string& what) {
  fail(kind, "line " + std::to_string(line) + ": " + what);
}

/// Splits on `sep` outside single/double quotes; strips quotes and surrounding blanks.
inline std::vector<std::string> split_quoted(std::string_view s, char sep, std::size_t line) {
  std::vector<std::string> out;
  std::string cur;
  char quote = 0;
  bool was_quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == '\\' && i + 1 < s.size()) {
        cur.push_back(s[++i]);
      } else if (c == quote) {
        quote = 0;
      } else {
        cur.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      was_quoted = true;
    } else if (c == sep) {
      out.emplace_back(was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      was_quoted = false;
    } else if (!(was_quoted && std::isspace(static_cast<unsigned char>(c)))) {
      cur.push_back(c);
    }
  }
  if (quote) fail_at(ErrorKind::parse, line, "unterminated quote");
  out.emplace_back(was_quoted ? cur : std::string(trim(cur)));
  return out;
}

/// Reads one (possibly quoted) token from the front of `s`, advancing it.
inline std::string take_token(std::string_view& s, std::size_t line) {
  s = trim(s);
  if (s.empty()) fail_at(ErrorKind::parse, line, "expected a name");
  std::string out;
  if (s.front() == '\'' || s.front() == '"') {
    const char q = s.front();
    std::size_t i = 1;
    for (; i < s.size() && s[i] != q; ++i) {
      if (s[i] == '\\' && i + 1 < s.size()) ++i;
      out.push_back(s[i]);
    }
    if (i >= s.size()) fail_at(ErrorKind::parse, line, "unterminated quoted name");
    s.remove_prefix(i + 1);
  } else {
    std::size_t i = 0;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '{') ++i;
    out = std::string(s.substr(0, i));
    s.remove_prefix(i);
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string quote_if_needed(const std::string& name) {
  const bool plain = !name.empty() && std::none_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isspace(c) || c == ',' || c == '\'' || c == '"' || c == '{' || c == '}' || c == '%' || c == '\\';
  });
  if (plain) return name;
  std::string out = "'";
  for (char c : name) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "'";
}

struct ArffAttribute {
  std::string name;
  bool nominal = false;
  std::vector<std::string> domain;
};

}  // namespace detail

/// Dense ARFF reader. Attributes named in `label_names` (each with domain {0,1})
/// become the label matrix in that order; numeric attributes become features and
/// other nominal attributes are one-hot expanded into "name=value" features.
inline MultiLabelDataset parse_arff(std::string_view text, const std::vector<std::string>& label_names) {
  using detail::fail_at;
  std::vector<detail::ArffAttribute> attrs;
  bool in_data = false;
  std::size_t line_no = 0;

  std::vector<int> label_slot;      // attribute -> label column, or -1
  std::vector<std::size_t> feat_col;  // attribute -> first feature column
  MultiLabelDataset ds;

  auto finish_header = [&](std::size_t line) {
    if (attrs.empty()) fail_at(ErrorKind::parse, line, "@data before any @attribute");
    label_slot.assign(attrs.size(), -1);
    for (std::size_t l = 0; l < label_names.size(); ++l) {
      auto it = std::find_if(attrs.begin(), attrs.end(), [&](const auto& a) { return a.name == label_names[l]; });
      if (it == attrs.end()) fail(ErrorKind::schema, "label attribute '" + label_names[l] + "' not declared");
      auto dom = it->domain;
      std::sort(dom.begin(), dom.end());
      if (!it->nominal || dom != std::vector<std::string>{"0", "1"})
        fail(ErrorKind::schema, "label attribute '" + label_names[l] + "' must have domain {0,1}");
      label_slot[static_cast<std::size_t>(it - attrs.begin())] = static_cast<int>(l);
    }
    feat_col.assign(attrs.size(), 0);
    for (std::size_t a = 0; a < attrs.size(); ++a) {
      if (label_slot[a] >= 0) continue;
      feat_col[a] = ds.feature_names.size();
      if (attrs[a].nominal) {
        for (const auto& v : attrs[a].domain) ds.feature_names.push_back(attrs[a].name + "=" + v);
      } else {
        ds.feature_names.push_back(attrs[a].name);
      }
    }
    ds.label_names = label_names;
    ds.features = Matrix(0, ds.feature_names.size());
    ds.labels = LabelMatrix(0, label_names.size());
  };

  std::vector<double> frow;
  std::vector<unsigned char> yrow;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '%') continue;

    if (!in_data) {
      if (line.front() != '@') fail_at(ErrorKind::parse, line_no, "expected a header directive");
      if (detail::starts_with_ci(line, "@relation")) continue;
      if (detail::starts_with_ci(line, "@data")) {
        finish_header(line_no);
        in_data = true;
        continue;
      }
      if (!detail::starts_with_ci(line, "@attribute")) fail_at(ErrorKind::parse, line_no, "unknown directive");
      std::string_view rest = line.substr(10);
      detail::ArffAttribute attr;
      attr.name = detail::take_token(rest, line_no);
      rest = detail::trim(rest);
      if (!rest.empty() && rest.front() == '{') {
        if (rest.back() != '}') fail_at(ErrorKind::parse, line_no, "unterminated nominal domain");
        attr.nominal = true;
        attr.domain = detail::split_quoted(rest.substr(1, rest.size() - 2), ',', line_no);
        if (attr.domain.empty()) fail_at(ErrorKind::parse, line_no, "empty nominal domain");
      } else {
        const auto type = detail::lower(rest);
        if (type != "numeric" && type != "real" && type != "integer")
          fail_at(ErrorKind::parse, line_no, "unsupported attribute type '" + std::string(rest) + "'");
      }
      attrs.push_back(std::move(attr));
      continue;
    }

    if (line.front() == '{') fail_at(ErrorKind::parse, line_no, "sparse ARFF rows are not supported");
    auto fields = detail::split_quoted(line, ',', line_no);
    if (fields.size() != attrs.size())
      fail_at(ErrorKind::parse, line_no,
              "expected " + std::to_string(attrs.size()) + " values, found " + std::to_string(fields.size()));
    frow.assign(ds.feature_names.size(), 0.0);
    yrow.assign(label_names.size(), 0);
    for (std::size_t a = 0; a < attrs.size(); ++a) {
      const auto& v = fields[a];
      if (v == "?") fail_at(ErrorKind::value, line_no, "missing value in attribute '" + attrs[a].name + "'");
      if (label_slot[a] >= 0) {
        if (v != "0" && v != "1")
          fail_at(ErrorKind::value, line_no, "label '" + attrs[a].name + "' has value '" + v + "' outside {0,1}");
        yrow[static_cast<std::size_t>(label_slot[a])] = v == "1" ? 1 : 0;
      } else if (attrs[a].nominal) {
        auto it = std::find(attrs[a].domain.begin(), attrs[a].domain.end(), v);
        if (it == attrs[a].domain.end())
          fail_at(ErrorKind::value, line_no, "value '" + v + "' not in domain of '" + attrs[a].name + "'");
        frow[feat_col[a] + static_cast<std::size_t>(it - attrs[a].domain.begin())] = 1.0;
      } else {
        double x = 0.0;
        if (!detail::parse_double(v, x))
          fail_at(ErrorKind::parse, line_no, "non-numeric value '" + v + "' in attribute '" + attrs[a].name + "'");
        frow[feat_col[a]] = x;
      }
    }
    ds.features.append_row(frow);
    ds.labels.append_row(yrow);
  }
  if (!in_data) fail(ErrorKind::parse, "no @data section");
  ds.validate();
  return ds;
}

/// Dense ARFF writer; every feature is emitted as numeric, labels as {0,1}.
inline std::string write_arff(const MultiLabelDataset& ds, const std::string& relation = "dataset") {
  std::ostringstream out;
  out << "@relation " << detail::quote_if_needed(relation) << "\n\n";
  for (const auto& f : ds.feature_names) out << "@attribute " << detail::quote_if_needed(f) << " numeric\n";
  for (const auto& l : ds.label_names) out << "@attribute " << detail::quote_if_needed(l) << " {0,1}\n";
  out << "\n@data\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    bool first = true;
    for (double v : ds.features.row(i)) {
      out << (first ? "" : ",") << detail::format_double(v);
      first = false;
    }
    for (auto y : ds.labels.row(i)) out << ',' << static_cast<int>(y);
    out << '\n';
  }
  return out.str();
}

/// Label names from a MULAN-style manifest: <labels><label name="..."/>...</labels>.
inline std::vector<std::string> parse_label_xml(std::string_view text) {
  namespace pt = boost::property_tree;
  if (detail::trim(text).empty()) fail(ErrorKind::parse, "label manifest is empty");
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    fail(ErrorKind::parse, std::string("label manifest: ") + e.what());
  }
  const pt::ptree* root = nullptr;
  for (const auto& [key, child] : tree) {
    if (key == "<xmlcomment>") continue;
    if (root) fail(ErrorKind::parse, "label manifest has more than one root element");
    root = &child;
  }
  if (!root) fail(ErrorKind::parse, "label manifest has no root element");

  std::vector<std::string> names;
  for (const auto& [key, child] : *root) {
    if (key != "label") continue;
    auto name = child.get_optional<std::string>("<xmlattr>.name");
    if (!name || name->empty()) fail(ErrorKind::schema, "label element without a name attribute");
    names.push_back(*name);
  }
  if (names.size() < 2)
    fail(ErrorKind::schema, "label manifest lists " + std::to_string(names.size()) + " label(s); at least 2 required");
  return names;
}

}  // namespace lpwfcm
