#pragma once

// Ingest of <End_devices_Specs> XML fragments, e.g.
//
//   <End_devices_Specs> <Name>Raspberry pi 3</Name> <price>70</price>
//     <DLFramework> MobileNet V3</DLFramework> <Memory>8 GB</Memory>
//     <Camera>16 MP </Camera><CPU> </CPU> </End_devices_Specs>
//
// Only the flat element-with-text structure is supported; attributes are
// accepted and ignored.

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dlom/error.hpp"
#include "dlom/schema.hpp"

namespace dlom {

struct DeviceXmlResult {
  EndDeviceSpec device;
  std::vector<std::string> warnings;
};

namespace detail {

struct XmlElement {
  std::string name;
  std::string text;
  std::vector<XmlElement> children;
};

class XmlReader {
 public:
  explicit XmlReader(std::string_view src) : src_(src) {}

  XmlElement read_document() {
    skip_misc();
    if (at_end() || peek() != '<') fail("expected root element");
    XmlElement root = read_element();
    skip_misc();
    if (!at_end()) fail("unexpected content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorKind::kSyntax,
                "XML parse error at line " + std::to_string(line) + ", column " +
                    std::to_string(column) + ": " + what,
                nlohmann::ordered_json{{"line", line}, {"column", column}});
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }
  bool starts_with(std::string_view s) const { return src_.substr(pos_).starts_with(s); }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  // Whitespace, comments and processing instructions between elements.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) {
        auto end = src_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
      } else if (starts_with("<?")) {
        auto end = src_.find("?>", pos_ + 2);
        if (end == std::string_view::npos) fail("unterminated processing instruction");
        pos_ = end + 2;
      } else {
        return;
      }
    }
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           c == '.' || c == ':';
  }

  std::string read_name() {
    std::size_t start = pos_;
    while (!at_end() && name_char(peek())) ++pos_;
    if (start == pos_) fail("expected a tag name");
    return std::string(src_.substr(start, pos_ - start));
  }

  void skip_attributes() {
    for (;;) {
      skip_ws();
      if (at_end()) return;
      char c = peek();
      if (c == '>' || c == '/') return;
      read_name();
      skip_ws();
      if (at_end() || peek() != '=') fail("expected '=' in attribute");
      ++pos_;
      skip_ws();
      if (at_end() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
      char quote = peek();
      auto end = src_.find(quote, pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      pos_ = end + 1;
    }
  }

  std::string decode_entity() {
    auto semi = src_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 8) fail("malformed entity");
    std::string_view ent = src_.substr(pos_, semi - pos_ + 1);
    pos_ = semi + 1;
    if (ent == "&amp;") return "&";
    if (ent == "&lt;") return "<";
    if (ent == "&gt;") return ">";
    if (ent == "&quot;") return "\"";
    if (ent == "&apos;") return "'";
    fail("unknown entity " + std::string(ent));
  }

  XmlElement read_element() {
    ++pos_;  // '<'
    XmlElement el;
    el.name = read_name();
    skip_attributes();
    if (at_end()) fail("unclosed tag <" + el.name + ">");
    if (peek() == '/') {
      ++pos_;
      if (at_end() || peek() != '>') fail("expected '>' after '/' in <" + el.name + ">");
      ++pos_;
      return el;
    }
    ++pos_;  // '>'
    for (;;) {
      if (at_end()) fail("unclosed tag <" + el.name + ">");
      if (starts_with("<!--")) {
        skip_misc();
        continue;
      }
      if (starts_with("</")) {
        pos_ += 2;
        std::string closing = read_name();
        if (closing != el.name)
          fail("unclosed tag <" + el.name + "> (found </" + closing + ">)");
        skip_ws();
        if (at_end() || peek() != '>') fail("expected '>' in </" + closing + ">");
        ++pos_;
        return el;
      }
      if (peek() == '<') {
        el.children.push_back(read_element());
        continue;
      }
      if (peek() == '&') {
        el.text += decode_entity();
        continue;
      }
      el.text.push_back(peek());
      ++pos_;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// "8 GB" -> {8, "GB"}; "16" -> {16, ""}.
inline std::optional<std::pair<double, std::string>> split_quantity(std::string_view raw) {
  std::string s = trim(raw);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || !std::isfinite(value)) return std::nullopt;
  return std::pair{value, trim(std::string_view(ptr, s.data() + s.size() - ptr))};
}

}  // namespace detail

inline DeviceXmlResult parse_device_xml(std::string_view fragment) {
  detail::XmlElement root = detail::XmlReader(fragment).read_document();
  if (root.name != "End_devices_Specs")
    throw Error(ErrorKind::kSyntax,
                "root element must be <End_devices_Specs>, found <" + root.name + ">");

  DeviceXmlResult out;
  bool seen_name = false, seen_price = false, seen_framework = false;
  bool seen_memory = false, seen_camera = false, seen_cpu = false;

  for (const detail::XmlElement& child : root.children) {
    std::string value = detail::trim(child.text);
    const std::string& tag = child.name;
    if (detail::iequals(tag, "Name")) {
      seen_name = true;
      out.device.name = value;
    } else if (detail::iequals(tag, "price")) {
      seen_price = true;
      try {
        if (!value.empty()) out.device.price = Money::parse(value);
      } catch (const Error&) {
        out.warnings.push_back("unparseable <price> value '" + value + "'");
      }
    } else if (detail::iequals(tag, "DLFramework")) {
      seen_framework = true;
      out.device.dl_framework = value;
    } else if (detail::iequals(tag, "Memory")) {
      seen_memory = true;
      auto q = detail::split_quantity(value);
      if (!q) {
        if (!value.empty())
          out.warnings.push_back("unparseable <Memory> value '" + value + "'");
        continue;
      }
      double factor = 0.0;
      const std::string& unit = q->second;
      if (unit.empty() || detail::iequals(unit, "MB")) factor = 1.0;
      else if (detail::iequals(unit, "GB")) factor = 1024.0;
      else if (detail::iequals(unit, "TB")) factor = 1024.0 * 1024.0;
      else if (detail::iequals(unit, "KB")) factor = 1.0 / 1024.0;
      if (factor == 0.0) {
        out.warnings.push_back("unrecognized <Memory> unit, raw value '" + value + "'");
        continue;
      }
      out.device.memory_mb = static_cast<std::int64_t>(std::llround(q->first * factor));
    } else if (detail::iequals(tag, "Camera")) {
      seen_camera = true;
      auto q = detail::split_quantity(value);
      if (!q) {
        if (!value.empty())
          out.warnings.push_back("unparseable <Camera> value '" + value + "'");
        continue;
      }
      if (!q->second.empty() && !detail::iequals(q->second, "MP")) {
        out.warnings.push_back("unrecognized <Camera> unit, raw value '" + value + "'");
        continue;
      }
      out.device.camera_mp = q->first;
    } else if (detail::iequals(tag, "CPU")) {
      seen_cpu = true;
      out.device.cpu = value;
    } else if (detail::iequals(tag, "GPU")) {
      out.device.gpu = value;
    } else {
      out.warnings.push_back("unknown tag <" + tag + "> ignored");
    }
  }

  auto missing = [&](bool seen, const char* tag) {
    if (!seen) out.warnings.push_back(std::string("missing tag <") + tag + ">");
  };
  missing(seen_name, "Name");
  missing(seen_price, "price");
  missing(seen_framework, "DLFramework");
  missing(seen_memory, "Memory");
  missing(seen_camera, "Camera");
  missing(seen_cpu, "CPU");
  return out;
}

}  // namespace dlom
