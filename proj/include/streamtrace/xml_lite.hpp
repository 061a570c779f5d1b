#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace streamtrace {

// Minimal tolerant XML tree. Evidence may be damaged, so unclosed tags are
// recovered where unambiguous instead of failing the whole document.
struct XmlNode {
  std::string name;
  std::map<std::string, std::string> attributes;
  std::vector<XmlNode> children;
  std::string text;       // direct text content, entity-decoded
  bool recovered = false; // closed implicitly (damage recovery)

  std::optional<std::string> attr(const std::string& key) const;
  const XmlNode* find_child(const std::string& child_name) const;
  std::vector<const XmlNode*> find_all(const std::string& child_name) const;
};

struct XmlParseResult {
  XmlNode document;  // synthetic container; elements are its children
  std::vector<std::string> anomalies;
  bool well_formed = true;

  const XmlNode* root_element() const {
    for (const XmlNode& n : document.children)
      if (!n.name.empty()) return &n;
    return nullptr;
  }
};

XmlParseResult parse_xml_forgiving(std::string_view text);

}  // namespace streamtrace
