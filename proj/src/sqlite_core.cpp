#include "streamtrace/sqlite_core.hpp"

#include <algorithm>
#include <cstring>

#include "streamtrace/errors.hpp"
#include "streamtrace/util.hpp"

namespace streamtrace::sqlite {

namespace {

constexpr char kMagic[16] = {'S', 'Q', 'L', 'i', 't', 'e', ' ', 'f',
                             'o', 'r', 'm', 'a', 't', ' ', '3', '\0'};

uint16_t be16(std::span<const uint8_t> b, size_t off) {
  return static_cast<uint16_t>((b[off] << 8) | b[off + 1]);
}

uint32_t be32(std::span<const uint8_t> b, size_t off) {
  return (static_cast<uint32_t>(b[off]) << 24) | (static_cast<uint32_t>(b[off + 1]) << 16) |
         (static_cast<uint32_t>(b[off + 2]) << 8) | static_cast<uint32_t>(b[off + 3]);
}

int64_t signed_be(std::span<const uint8_t> b, size_t off, size_t width) {
  int64_t v = (b[off] & 0x80) ? -1 : 0;  // sign-extend
  for (size_t i = 0; i < width; ++i) v = (v << 8) | b[off + i];
  return v;
}

}  // namespace

const char* liveness_name(Liveness l) noexcept {
  switch (l) {
    case Liveness::Live: return "live";
    case Liveness::CarvedFreeblock: return "carved_freeblock";
    case Liveness::CarvedFreelist: return "carved_freelist";
  }
  return "unknown";
}

const char* page_class_name(PageClassKind k) noexcept {
  switch (k) {
    case PageClassKind::Schema: return "schema";
    case PageClassKind::Table: return "table";
    case PageClassKind::Index: return "index";
    case PageClassKind::Overflow: return "overflow";
    case PageClassKind::Freelist: return "freelist";
    case PageClassKind::Unclassified: return "unclassified";
  }
  return "unclassified";
}

CellValue CellValue::integer(int64_t v) {
  CellValue c;
  c.kind = Kind::Integer;
  c.integer_value = v;
  return c;
}

CellValue CellValue::real(double v) {
  CellValue c;
  c.kind = Kind::Float;
  c.float_value = v;
  return c;
}

CellValue CellValue::text(std::string v) {
  CellValue c;
  c.kind = Kind::Text;
  c.text_value = std::move(v);
  return c;
}

CellValue CellValue::blob(std::vector<uint8_t> v) {
  CellValue c;
  c.kind = Kind::Blob;
  c.blob_value = std::move(v);
  return c;
}

DbHeader parse_header(std::span<const uint8_t> bytes, uint64_t file_length) {
  if (bytes.size() < 100) raise(Errc::TooShort, "database header requires 100 bytes");
  if (std::memcmp(bytes.data(), kMagic, 16) != 0)
    raise(Errc::BadMagic, "missing SQLite format 3 magic");

  DbHeader h;
  uint32_t raw_page_size = be16(bytes, 16);
  h.page_size = raw_page_size == 1 ? 65536u : raw_page_size;
  bool pow2 = h.page_size >= 512 && h.page_size <= 65536 &&
              (h.page_size & (h.page_size - 1)) == 0;
  if (!pow2) raise(Errc::BadMagic, "invalid page size " + std::to_string(raw_page_size));

  h.reserved_per_page = bytes[20];
  h.change_counter = be32(bytes, 24);
  h.declared_page_count = be32(bytes, 28);
  h.freelist_head = be32(bytes, 32);
  h.freelist_count = be32(bytes, 36);
  h.schema_cookie = be32(bytes, 40);
  uint32_t encoding = be32(bytes, 56);
  h.text_encoding = (encoding == 2)   ? TextEncoding::Utf16Le
                    : (encoding == 3) ? TextEncoding::Utf16Be
                                      : TextEncoding::Utf8;
  h.version_valid_for = be32(bytes, 92);
  h.file_length = file_length;

  h.header_count_trusted =
      h.declared_page_count > 0 && h.change_counter == h.version_valid_for;
  if (h.header_count_trusted) {
    h.page_count = h.declared_page_count;
  } else if (file_length > 0) {
    h.page_count = static_cast<uint32_t>(file_length / h.page_size);
  } else {
    h.page_count = h.declared_page_count;
  }
  if (file_length > 0 &&
      static_cast<uint64_t>(h.page_size) * h.page_count > file_length)
    h.truncated = true;
  return h;
}

Varint decode_varint(std::span<const uint8_t> bytes, size_t offset) {
  if (offset >= bytes.size()) raise(Errc::OutOfBounds, "varint offset past end");
  int64_t value = 0;
  for (int i = 0; i < 8; ++i) {
    if (offset + i >= bytes.size()) raise(Errc::OutOfBounds, "varint runs past end");
    uint8_t b = bytes[offset + i];
    if ((b & 0x80) == 0) return {(value << 7) | b, i + 1};
    value = (value << 7) | (b & 0x7F);
  }
  if (offset + 8 >= bytes.size()) raise(Errc::OutOfBounds, "varint runs past end");
  return {static_cast<int64_t>((static_cast<uint64_t>(value) << 8) | bytes[offset + 8]), 9};
}

SerialTypeInfo serial_type_info(uint64_t t) {
  switch (t) {
    case 0: return {0, true};   // NULL
    case 1: return {1, true};
    case 2: return {2, true};
    case 3: return {3, true};
    case 4: return {4, true};
    case 5: return {6, true};
    case 6: return {8, true};
    case 7: return {8, true};   // IEEE 754 double, big-endian
    case 8: return {0, true};   // integer 0
    case 9: return {0, true};   // integer 1
    case 10:
    case 11: return {0, false};  // reserved
    default:
      if (t >= 12) return {(t - 12) / 2, true};
      return {0, false};
  }
}

CellValue decode_serial_value(uint64_t serial_type, std::span<const uint8_t> bytes, size_t offset,
                              TextEncoding encoding, bool allow_truncated) {
  SerialTypeInfo info = serial_type_info(serial_type);
  CellValue v;
  v.serial_type = serial_type;
  uint64_t avail = offset <= bytes.size() ? bytes.size() - offset : 0;
  uint64_t take = info.width;
  if (take > avail) {
    if (!allow_truncated) raise(Errc::OutOfBounds, "serial value runs past payload");
    take = avail;
    v.truncated = true;
  }

  switch (serial_type) {
    case 0:
      v.kind = CellValue::Kind::Null;
      return v;
    case 1:
    case 2:
    case 3:
    case 4:
    case 5:
    case 6:
      if (take < info.width) {  // integer truncated: value unrecoverable
        v.kind = CellValue::Kind::Integer;
        v.truncated = true;
        return v;
      }
      v.kind = CellValue::Kind::Integer;
      v.integer_value = signed_be(bytes, offset, info.width);
      return v;
    case 7: {
      v.kind = CellValue::Kind::Float;
      if (take < 8) {
        v.truncated = true;
        return v;
      }
      uint64_t raw = 0;
      for (int i = 0; i < 8; ++i) raw = (raw << 8) | bytes[offset + i];
      double d;
      std::memcpy(&d, &raw, sizeof(d));
      v.float_value = d;
      return v;
    }
    case 8:
      v.kind = CellValue::Kind::Integer;
      v.integer_value = 0;
      return v;
    case 9:
      v.kind = CellValue::Kind::Integer;
      v.integer_value = 1;
      return v;
    default:
      if (serial_type % 2 == 0) {
        v.kind = CellValue::Kind::Blob;
        v.blob_value.assign(bytes.begin() + offset, bytes.begin() + offset + take);
      } else {
        v.kind = CellValue::Kind::Text;
        std::span<const uint8_t> text_bytes{bytes.data() + offset, static_cast<size_t>(take)};
        if (encoding == TextEncoding::Utf8)
          v.text_value = utf8_with_escapes(text_bytes, &v.text_escaped);
        else
          v.text_value = utf16_to_utf8_with_escapes(
              text_bytes, encoding == TextEncoding::Utf16Be, &v.text_escaped);
      }
      return v;
  }
}

std::vector<uint8_t> MemoryPageSource::read(uint64_t offset, uint64_t length) const {
  if (offset >= bytes_.size()) return {};
  uint64_t take = std::min<uint64_t>(length, bytes_.size() - offset);
  return {bytes_.begin() + static_cast<size_t>(offset),
          bytes_.begin() + static_cast<size_t>(offset + take)};
}

Database::Database(std::shared_ptr<const PageSource> source, std::string db_path_label)
    : source_(std::move(source)), path_label_(std::move(db_path_label)) {
  uint64_t len = source_->size();
  std::vector<uint8_t> head = source_->read(0, 100);
  header_ = parse_header(head, len);
  if (!header_.header_count_trusted)
    note(1, "stale_header_page_count",
         "change counter mismatch; page count derived from file size");
  if (header_.truncated)
    note(1, "truncated_file",
         "declared pages extend past end of file (" + std::to_string(header_.page_count) +
             " pages, " + std::to_string(len) + " bytes)");
  if (len % header_.page_size != 0)
    note(1, "trailing_partial_page", std::to_string(len % header_.page_size) + " stray bytes");
}

void Database::note(uint32_t page, const std::string& kind, const std::string& detail) {
  anomalies_.push_back({path_label_, page, kind, detail});
}

std::vector<uint8_t> Database::page(uint32_t page_number) const {
  if (page_number == 0 || page_number > header_.page_count)
    raise(Errc::OutOfBounds, "page " + std::to_string(page_number));
  return source_->read(static_cast<uint64_t>(page_number - 1) * header_.page_size,
                       header_.page_size);
}

BtreePage Database::parse_btree_page(uint32_t page_number) const {
  std::vector<uint8_t> data = page(page_number);
  BtreePage p;
  p.page_number = page_number;
  size_t hdr = (page_number == 1) ? 100 : 0;  // page 1 carries the file header
  if (data.size() < hdr + 8) {
    p.kind = PageKind::Unknown;
    return p;
  }
  std::span<const uint8_t> b{data};
  uint8_t type = b[hdr];
  bool interior = false;
  switch (type) {
    case 2: p.kind = PageKind::IndexInterior; interior = true; break;
    case 5: p.kind = PageKind::TableInterior; interior = true; break;
    case 10: p.kind = PageKind::IndexLeaf; break;
    case 13: p.kind = PageKind::TableLeaf; break;
    default: p.kind = PageKind::Unknown; return p;
  }
  uint16_t first_freeblock = be16(b, hdr + 1);
  p.cell_count = be16(b, hdr + 3);
  p.content_start = be16(b, hdr + 5);
  p.fragmented_bytes = b[hdr + 7];
  size_t ptr_array = hdr + 8;
  if (interior) {
    if (data.size() < hdr + 12) {
      p.kind = PageKind::Unknown;
      return p;
    }
    p.right_child = be32(b, hdr + 8);
    ptr_array = hdr + 12;
  }

  size_t body_start = ptr_array + 2ull * p.cell_count;
  for (uint16_t i = 0; i < p.cell_count; ++i) {
    size_t off = ptr_array + 2ull * i;
    if (off + 2 > data.size()) break;
    uint16_t cell = be16(b, off);
    // cell offsets must land strictly inside the page body
    if (cell >= body_start && cell < data.size()) p.cell_offsets.push_back(cell);
  }

  // freeblock chain: acyclic, monotonically increasing offsets
  uint16_t fb = first_freeblock;
  uint16_t prev = 0;
  int guard = 0;
  while (fb != 0 && guard++ < 4096) {
    if (fb <= prev || static_cast<size_t>(fb) + 4 > data.size()) break;
    uint16_t next = be16(b, fb);
    uint16_t size = be16(b, fb + 2);
    if (size < 4 || static_cast<size_t>(fb) + size > data.size()) break;
    p.freeblock_offsets.push_back(fb);
    p.freeblock_sizes.push_back(size);
    prev = fb;
    fb = next;
  }
  return p;
}

Database::CellPayload Database::assemble_payload(std::span<const uint8_t> page_bytes,
                                                 size_t local_offset, uint64_t payload_len,
                                                 uint32_t page_number, bool index_page) {
  CellPayload out;
  uint32_t usable = header_.usable_page_size();
  uint64_t x = index_page ? (static_cast<uint64_t>(usable - 12) * 64 / 255 - 23)
                          : (usable - 35);
  uint64_t local = payload_len;
  if (payload_len > x) {
    uint64_t m = static_cast<uint64_t>(usable - 12) * 32 / 255 - 23;
    uint64_t k = m + (payload_len - m) % (usable - 4);
    local = (k <= x) ? k : m;
  }

  uint64_t take = std::min<uint64_t>(local, page_bytes.size() > local_offset
                                                ? page_bytes.size() - local_offset
                                                : 0);
  out.bytes.assign(page_bytes.begin() + local_offset,
                   page_bytes.begin() + local_offset + take);
  if (take < local) {
    out.truncated = true;
    note(page_number, "cell_past_page_end", "local payload truncated");
    return out;
  }
  if (local == payload_len) return out;

  if (local_offset + local + 4 > page_bytes.size()) {
    out.truncated = true;
    note(page_number, "overflow_pointer_missing", "no room for overflow page number");
    return out;
  }
  uint32_t next = be32(page_bytes, local_offset + local);
  uint64_t remaining = payload_len - local;
  std::vector<char> seen(header_.page_count + 1, 0);
  while (next != 0 && remaining > 0) {
    if (next > header_.page_count) {
      out.truncated = true;
      note(page_number, "overflow_out_of_range", "page " + std::to_string(next));
      break;
    }
    if (seen[next]) {
      out.truncated = true;
      note(next, "overflow_cycle", "overflow chain revisits page");
      break;
    }
    seen[next] = 1;
    out.overflow_pages.push_back(next);
    std::vector<uint8_t> op = page(next);
    if (op.size() < 4) {
      out.truncated = true;
      note(next, "overflow_short_page", "overflow page shorter than 4 bytes");
      break;
    }
    uint64_t chunk = std::min<uint64_t>(remaining, usable - 4);
    chunk = std::min<uint64_t>(chunk, op.size() - 4);
    out.bytes.insert(out.bytes.end(), op.begin() + 4, op.begin() + 4 + chunk);
    remaining -= chunk;
    next = be32(op, 0);
  }
  if (remaining > 0) {
    out.truncated = true;
    note(page_number, "overflow_chain_short",
         std::to_string(remaining) + " payload bytes unrecovered");
  }
  return out;
}

std::optional<SqliteRecord> Database::decode_record(std::span<const uint8_t> payload,
                                                    bool truncated, uint32_t page_number,
                                                    uint32_t byte_offset) {
  SqliteRecord rec;
  rec.page_number = page_number;
  rec.byte_offset = byte_offset;
  try {
    Varint header_size = decode_varint(payload, 0);
    if (header_size.value < header_size.width ||
        static_cast<uint64_t>(header_size.value) > payload.size() + (truncated ? 1 << 20 : 0)) {
      note(page_number, "bad_record_header", "header size out of range");
      return std::nullopt;
    }
    size_t pos = header_size.width;
    size_t header_end = std::min<size_t>(static_cast<size_t>(header_size.value), payload.size());
    std::vector<uint64_t> types;
    while (pos < header_end) {
      Varint t = decode_varint(payload, pos);
      pos += t.width;
      types.push_back(static_cast<uint64_t>(t.value));
    }
    size_t value_pos = static_cast<size_t>(header_size.value);
    for (uint64_t t : types) {
      CellValue v = decode_serial_value(t, payload, std::min(value_pos, payload.size()),
                                        header_.text_encoding, true);
      value_pos += static_cast<size_t>(serial_type_info(t).width);
      if (truncated && value_pos > payload.size()) v.truncated = true;
      rec.values.push_back(std::move(v));
    }
    return rec;
  } catch (const Error&) {
    note(page_number, "bad_record", "record decode failed at offset " +
                                        std::to_string(byte_offset));
    return std::nullopt;
  }
}

void Database::walk_tree(uint32_t page_number, std::vector<uint32_t>& visited_stack,
                         std::vector<char>& visited,
                         const std::function<void(SqliteRecord&&)>& sink) {
  if (page_number == 0 || page_number > header_.page_count) {
    note(page_number, "page_out_of_range", "b-tree reference outside database");
    return;
  }
  if (visited[page_number]) {
    note(page_number, "page_cycle", "page visited twice; branch abandoned");
    return;
  }
  visited[page_number] = 1;
  visited_stack.push_back(page_number);

  BtreePage p = parse_btree_page(page_number);
  std::vector<uint8_t> data = page(page_number);
  std::span<const uint8_t> b{data};

  if (p.kind == PageKind::TableInterior) {
    for (uint16_t off : p.cell_offsets) {
      if (static_cast<size_t>(off) + 4 > data.size()) continue;
      uint32_t child = be32(b, off);
      walk_tree(child, visited_stack, visited, sink);
    }
    if (p.right_child) walk_tree(p.right_child, visited_stack, visited, sink);
    return;
  }
  if (p.kind != PageKind::TableLeaf) {
    note(page_number, "unexpected_page_kind", "expected table page");
    return;
  }

  for (uint16_t off : p.cell_offsets) {
    try {
      Varint payload_len = decode_varint(b, off);
      Varint rowid = decode_varint(b, off + payload_len.width);
      size_t local_start = off + payload_len.width + rowid.width;
      CellPayload payload = assemble_payload(b, local_start,
                                             static_cast<uint64_t>(payload_len.value),
                                             page_number, false);
      auto rec = decode_record(payload.bytes, payload.truncated, page_number, off);
      if (!rec) continue;
      rec->rowid = rowid.value;
      rec->liveness = Liveness::Live;
      sink(std::move(*rec));
    } catch (const Error&) {
      note(page_number, "bad_cell", "cell at offset " + std::to_string(off));
    }
  }
}

void Database::walk_table(uint32_t root_page,
                          const std::function<void(SqliteRecord&&)>& sink) {
  if (root_page == 0 || root_page > header_.page_count)
    raise(Errc::OutOfBounds, "root page " + std::to_string(root_page));
  BtreePage root = parse_btree_page(root_page);
  if (root.kind != PageKind::TableInterior && root.kind != PageKind::TableLeaf)
    raise(Errc::BadPageKind, "page " + std::to_string(root_page) + " is not a table b-tree");
  std::vector<char> visited(header_.page_count + 1, 0);
  std::vector<uint32_t> stack;
  walk_tree(root_page, stack, visited, sink);
}

std::vector<SqliteRecord> Database::walk_table(uint32_t root_page) {
  std::vector<SqliteRecord> out;
  walk_table(root_page, [&](SqliteRecord&& r) { out.push_back(std::move(r)); });
  return out;
}

std::vector<SchemaObject> Database::read_schema() {
  if (schema_cache_) return *schema_cache_;
  std::vector<SchemaObject> out;
  for (SqliteRecord& rec : walk_table(1)) {
    if (rec.values.size() < 5) {
      note(rec.page_number, "short_schema_row",
           std::to_string(rec.values.size()) + " columns");
      continue;
    }
    SchemaObject obj;
    obj.object_type = rec.values[0].kind == CellValue::Kind::Text ? rec.values[0].text_value : "";
    obj.name = rec.values[1].kind == CellValue::Kind::Text ? rec.values[1].text_value : "";
    obj.table_name = rec.values[2].kind == CellValue::Kind::Text ? rec.values[2].text_value : "";
    if (rec.values[3].kind == CellValue::Kind::Integer)
      obj.root_page = static_cast<uint32_t>(rec.values[3].integer_value);
    obj.sql_text = rec.values[4].kind == CellValue::Kind::Text ? rec.values[4].text_value : "";
    out.push_back(std::move(obj));
  }
  schema_cache_ = out;
  return out;
}

std::vector<uint32_t> Database::freelist_pages(std::vector<char>* trunk_flags) const {
  std::vector<uint32_t> pages;
  std::vector<char> seen(header_.page_count + 1, 0);
  uint32_t trunk = header_.freelist_head;
  int guard = 0;
  while (trunk != 0 && guard++ < static_cast<int>(header_.page_count) + 8) {
    if (trunk > header_.page_count || seen[trunk]) break;
    seen[trunk] = 1;
    pages.push_back(trunk);
    if (trunk_flags) {
      if (trunk_flags->size() < header_.page_count + 1)
        trunk_flags->assign(header_.page_count + 1, 0);
      (*trunk_flags)[trunk] = 1;
    }
    std::vector<uint8_t> data = page(trunk);
    if (data.size() < 8) break;
    uint32_t next = be32(data, 0);
    uint32_t leaf_count = be32(data, 4);
    uint64_t max_leaves = (header_.usable_page_size() - 8) / 4;
    if (leaf_count > max_leaves) leaf_count = static_cast<uint32_t>(max_leaves);
    for (uint32_t i = 0; i < leaf_count; ++i) {
      size_t off = 8 + 4ull * i;
      if (off + 4 > data.size()) break;
      uint32_t leaf = be32(data, off);
      if (leaf == 0 || leaf > header_.page_count || seen[leaf]) continue;
      seen[leaf] = 1;
      pages.push_back(leaf);
    }
    trunk = next;
  }
  return pages;
}

std::vector<PageClass> Database::classify_pages() {
  if (class_cache_) return *class_cache_;
  std::vector<PageClass> out(header_.page_count);
  for (uint32_t i = 0; i < header_.page_count; ++i)
    out[i] = {i + 1, PageClassKind::Unclassified, ""};
  std::vector<char> claimed(header_.page_count + 1, 0);

  auto claim = [&](uint32_t pageno, PageClassKind kind, const std::string& owner) {
    if (pageno == 0 || pageno > header_.page_count) return;
    if (claimed[pageno]) {
      note(pageno, "page_multiply_referenced", "already classified as " +
                                                   std::string(page_class_name(
                                                       out[pageno - 1].kind)));
      return;
    }
    claimed[pageno] = 1;
    out[pageno - 1].kind = kind;
    out[pageno - 1].owner = owner;
  };

  // structural walk of one b-tree, claiming interior/leaf plus overflow pages
  auto claim_tree = [&](uint32_t root, PageClassKind kind, const std::string& owner) {
    std::vector<uint32_t> stack{root};
    std::vector<char> visited(header_.page_count + 1, 0);
    while (!stack.empty()) {
      uint32_t pn = stack.back();
      stack.pop_back();
      if (pn == 0 || pn > header_.page_count || visited[pn]) continue;
      visited[pn] = 1;
      claim(pn, kind, owner);
      BtreePage p = parse_btree_page(pn);
      std::vector<uint8_t> data = page(pn);
      std::span<const uint8_t> b{data};
      bool interior =
          p.kind == PageKind::TableInterior || p.kind == PageKind::IndexInterior;
      bool index_page = p.kind == PageKind::IndexInterior || p.kind == PageKind::IndexLeaf;
      if (interior) {
        for (uint16_t off : p.cell_offsets)
          if (static_cast<size_t>(off) + 4 <= data.size()) stack.push_back(be32(b, off));
        if (p.right_child) stack.push_back(p.right_child);
      }
      // overflow chains hang off payload-bearing cells
      if (p.kind == PageKind::TableLeaf || p.kind == PageKind::IndexLeaf ||
          p.kind == PageKind::IndexInterior) {
        for (uint16_t off : p.cell_offsets) {
          try {
            size_t pos = off;
            if (p.kind == PageKind::IndexInterior) pos += 4;
            Varint payload_len = decode_varint(b, pos);
            pos += payload_len.width;
            if (p.kind == PageKind::TableLeaf) {
              Varint rowid = decode_varint(b, pos);
              pos += rowid.width;
            }
            CellPayload payload =
                assemble_payload(b, pos, static_cast<uint64_t>(payload_len.value), pn,
                                 index_page);
            for (uint32_t op : payload.overflow_pages)
              claim(op, PageClassKind::Overflow, owner);
          } catch (const Error&) {
            // accounted as bad_cell during traversal
          }
        }
      }
    }
  };

  claim_tree(1, PageClassKind::Schema, "sqlite_schema");
  for (const SchemaObject& obj : read_schema()) {
    if (obj.root_page == 0) continue;
    if (obj.object_type == "table")
      claim_tree(obj.root_page, PageClassKind::Table, obj.name);
    else if (obj.object_type == "index")
      claim_tree(obj.root_page, PageClassKind::Index, obj.name);
  }
  for (uint32_t pn : freelist_pages()) claim(pn, PageClassKind::Freelist, "");

  for (uint32_t i = 0; i < header_.page_count; ++i)
    if (out[i].kind == PageClassKind::Unclassified)
      note(i + 1, "unclassified_page", "not reachable from schema or freelist");
  class_cache_ = out;
  return out;
}

std::string Database::decode_text(std::span<const uint8_t> bytes) const {
  if (header_.text_encoding == TextEncoding::Utf8) return utf8_with_escapes(bytes);
  return utf16_to_utf8_with_escapes(bytes, header_.text_encoding == TextEncoding::Utf16Be);
}

}  // namespace streamtrace::sqlite
