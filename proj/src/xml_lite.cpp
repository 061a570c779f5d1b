#include "streamtrace/xml_lite.hpp"

#include <cctype>

namespace streamtrace {

std::optional<std::string> XmlNode::attr(const std::string& key) const {
  auto it = attributes.find(key);
  if (it == attributes.end()) return std::nullopt;
  return it->second;
}

const XmlNode* XmlNode::find_child(const std::string& child_name) const {
  for (const XmlNode& c : children)
    if (c.name == child_name) return &c;
  return nullptr;
}

std::vector<const XmlNode*> XmlNode::find_all(const std::string& child_name) const {
  std::vector<const XmlNode*> out;
  for (const XmlNode& c : children)
    if (c.name == child_name) out.push_back(&c);
  return out;
}

namespace {

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    size_t semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += s[i];
      continue;
    }
    std::string_view ent = s.substr(i + 1, semi - i - 1);
    if (ent == "amp") out += '&';
    else if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (!ent.empty() && ent[0] == '#') {
      int code = 0;
      bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      bool ok = true;
      for (size_t k = hex ? 2 : 1; k < ent.size(); ++k) {
        char c = ent[k];
        int digit;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        else { ok = false; break; }
        code = code * (hex ? 16 : 10) + digit;
      }
      if (ok && code > 0 && code < 0x110000) {
        // UTF-8 encode
        if (code < 0x80) out += static_cast<char>(code);
        else if (code < 0x800) {
          out += static_cast<char>(0xC0 | (code >> 6));
          out += static_cast<char>(0x80 | (code & 0x3F));
        } else if (code < 0x10000) {
          out += static_cast<char>(0xE0 | (code >> 12));
          out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (code & 0x3F));
        } else {
          out += static_cast<char>(0xF0 | (code >> 18));
          out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
          out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (code & 0x3F));
        }
      } else {
        out.append(s.substr(i, semi - i + 1));
      }
    } else {
      out.append(s.substr(i, semi - i + 1));
    }
    i = semi;
  }
  return out;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
         c == ':';
}

struct Parser {
  std::string_view text;
  size_t pos = 0;
  XmlParseResult result;
  std::vector<XmlNode*> stack;  // open elements; stack[0] = document

  void anomaly(const std::string& what) {
    result.anomalies.push_back(what);
    result.well_formed = false;
  }

  XmlNode* top() { return stack.back(); }

  void append_text(std::string_view raw) {
    std::string decoded = decode_entities(raw);
    // keep trimmed text only; whitespace-only runs are layout
    size_t b = 0, e = decoded.size();
    while (b < e && std::isspace(static_cast<unsigned char>(decoded[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(decoded[e - 1]))) --e;
    if (b < e) {
      if (!top()->text.empty()) top()->text += ' ';
      top()->text.append(decoded, b, e - b);
    }
  }

  void parse_attributes(std::string_view tag, XmlNode& node) {
    size_t i = 0;
    while (i < tag.size()) {
      while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
      if (i >= tag.size()) break;
      size_t name_start = i;
      while (i < tag.size() && is_name_char(tag[i])) ++i;
      if (i == name_start) {
        ++i;
        continue;
      }
      std::string name(tag.substr(name_start, i - name_start));
      while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
      if (i >= tag.size() || tag[i] != '=') {
        node.attributes.emplace(name, "");
        continue;
      }
      ++i;
      while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
      std::string value;
      if (i < tag.size() && (tag[i] == '"' || tag[i] == '\'')) {
        char q = tag[i++];
        size_t vstart = i;
        while (i < tag.size() && tag[i] != q) ++i;
        value = decode_entities(tag.substr(vstart, i - vstart));
        if (i < tag.size()) ++i;
      } else {  // unquoted value, tolerated
        size_t vstart = i;
        while (i < tag.size() && !std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
        value = decode_entities(tag.substr(vstart, i - vstart));
      }
      node.attributes.emplace(std::move(name), std::move(value));
    }
  }

  void close_element(const std::string& name) {
    // pop until the matching open element; children left open are recovered
    for (size_t depth = stack.size(); depth > 1; --depth) {
      if (stack[depth - 1]->name == name) {
        for (size_t d = stack.size(); d > depth; --d) {
          stack[d - 1]->recovered = true;
          anomaly("unclosed <" + stack[d - 1]->name + "> recovered at </" + name + ">");
        }
        stack.resize(depth - 1);
        return;
      }
    }
    anomaly("stray close tag </" + name + ">");
  }

  void run() {
    result.document.name.clear();
    stack.push_back(&result.document);

    while (pos < text.size()) {
      size_t lt = text.find('<', pos);
      if (lt == std::string_view::npos) {
        append_text(text.substr(pos));
        break;
      }
      if (lt > pos) append_text(text.substr(pos, lt - pos));
      pos = lt;

      if (text.compare(pos, 4, "<!--") == 0) {
        size_t end = text.find("-->", pos + 4);
        pos = end == std::string_view::npos ? text.size() : end + 3;
        continue;
      }
      if (text.compare(pos, 9, "<![CDATA[") == 0) {
        size_t end = text.find("]]>", pos + 9);
        std::string_view content =
            text.substr(pos + 9, (end == std::string_view::npos ? text.size() : end) - pos - 9);
        if (!top()->text.empty()) top()->text += ' ';
        top()->text.append(content);
        pos = end == std::string_view::npos ? text.size() : end + 3;
        continue;
      }
      if (text.compare(pos, 2, "<?") == 0 || text.compare(pos, 2, "<!") == 0) {
        size_t end = text.find('>', pos);
        pos = end == std::string_view::npos ? text.size() : end + 1;
        continue;
      }

      size_t gt = text.find('>', pos);
      if (gt == std::string_view::npos) {
        anomaly("unterminated tag at offset " + std::to_string(pos));
        break;
      }
      std::string_view tag = text.substr(pos + 1, gt - pos - 1);
      pos = gt + 1;
      if (tag.empty()) continue;

      if (tag[0] == '/') {
        size_t i = 1;
        while (i < tag.size() && is_name_char(tag[i])) ++i;
        close_element(std::string(tag.substr(1, i - 1)));
        continue;
      }

      bool self_close = tag.back() == '/';
      if (self_close) tag.remove_suffix(1);
      size_t i = 0;
      while (i < tag.size() && is_name_char(tag[i])) ++i;
      if (i == 0) {
        anomaly("malformed tag near offset " + std::to_string(lt));
        continue;
      }
      XmlNode node;
      node.name = std::string(tag.substr(0, i));
      parse_attributes(tag.substr(i), node);
      top()->children.push_back(std::move(node));
      if (!self_close) stack.push_back(&top()->children.back());
    }

    for (size_t d = stack.size(); d > 1; --d) {
      stack[d - 1]->recovered = true;
      anomaly("unclosed <" + stack[d - 1]->name + "> recovered at end of input");
    }
  }
};

}  // namespace

XmlParseResult parse_xml_forgiving(std::string_view text) {
  Parser p;
  p.text = text;
  p.run();
  return std::move(p.result);
}

}  // namespace streamtrace
