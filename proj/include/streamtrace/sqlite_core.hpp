#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamtrace/evidence_source.hpp"

namespace streamtrace::sqlite {

enum class TextEncoding { Utf8 = 1, Utf16Le = 2, Utf16Be = 3 };

struct DbHeader {
  uint32_t page_size = 0;   // normalized: raw value 1 means 65536
  uint32_t page_count = 0;  // effective count used for iteration
  uint32_t declared_page_count = 0;
  TextEncoding text_encoding = TextEncoding::Utf8;
  uint32_t freelist_head = 0;
  uint32_t freelist_count = 0;
  uint32_t schema_cookie = 0;
  uint32_t reserved_per_page = 0;
  uint32_t change_counter = 0;
  uint32_t version_valid_for = 0;
  uint64_t file_length = 0;
  bool header_count_trusted = true;  // change counter matched version-valid-for
  bool truncated = false;            // page_size * page_count exceeds file length

  uint32_t usable_page_size() const { return page_size - reserved_per_page; }
};

// All multi-byte file/page header fields are big-endian.
DbHeader parse_header(std::span<const uint8_t> bytes, uint64_t file_length = 0);

struct Varint {
  int64_t value = 0;
  int width = 0;  // 1..9
};

// Big-endian base-128; the ninth byte contributes all 8 bits.
Varint decode_varint(std::span<const uint8_t> bytes, size_t offset);

enum class PageKind {
  TableInterior,
  TableLeaf,
  IndexInterior,
  IndexLeaf,
  Overflow,
  Freelist,
  Unknown
};

struct BtreePage {
  uint32_t page_number = 0;  // 1-based
  PageKind kind = PageKind::Unknown;
  uint16_t cell_count = 0;
  std::vector<uint16_t> cell_offsets;
  std::vector<uint16_t> freeblock_offsets;
  std::vector<uint16_t> freeblock_sizes;
  uint8_t fragmented_bytes = 0;
  uint16_t content_start = 0;
  uint32_t right_child = 0;  // interior pages only
};

enum class Liveness { Live, CarvedFreeblock, CarvedFreelist };

const char* liveness_name(Liveness l) noexcept;

struct CellValue {
  enum class Kind { Null, Integer, Float, Text, Blob };
  Kind kind = Kind::Null;
  int64_t integer_value = 0;
  double float_value = 0.0;
  std::string text_value;
  std::vector<uint8_t> blob_value;
  bool truncated = false;
  // invalid byte sequences were preserved via the "\xHH" escape notation
  bool text_escaped = false;
  uint64_t serial_type = 0;

  static CellValue null() { return CellValue{}; }
  static CellValue integer(int64_t v);
  static CellValue real(double v);
  static CellValue text(std::string v);
  static CellValue blob(std::vector<uint8_t> v);

  bool operator==(const CellValue&) const = default;
};

struct SqliteRecord {
  std::optional<int64_t> rowid;
  std::vector<CellValue> values;
  uint32_t page_number = 0;
  Liveness liveness = Liveness::Live;
  uint32_t byte_offset = 0;  // offset of the record within its page
};

struct SchemaObject {
  std::string object_type;  // "table", "index", "view", "trigger"
  std::string name;
  std::string table_name;
  uint32_t root_page = 0;
  std::string sql_text;
};

struct Anomaly {
  std::string db_path;
  uint32_t page = 0;
  std::string kind;
  std::string detail;
};

struct CarveOptions {
  uint64_t max_payload_bytes = 1'000'000;  // per-column cap on candidate payloads
  int min_columns = 2;
  bool parallel = true;
};

enum class PageClassKind { Schema, Table, Index, Overflow, Freelist, Unclassified };

const char* page_class_name(PageClassKind k) noexcept;

struct PageClass {
  uint32_t page_number = 0;
  PageClassKind kind = PageClassKind::Unclassified;
  std::string owner;  // table or index name where applicable
};

// Read-only byte source a database is parsed from.
class PageSource {
public:
  virtual ~PageSource() = default;
  virtual uint64_t size() const = 0;
  // Short reads at EOF are permitted and surface as truncation anomalies.
  virtual std::vector<uint8_t> read(uint64_t offset, uint64_t length) const = 0;
};

class MemoryPageSource final : public PageSource {
public:
  explicit MemoryPageSource(std::vector<uint8_t> bytes) : bytes_(std::move(bytes)) {}
  uint64_t size() const override { return bytes_.size(); }
  std::vector<uint8_t> read(uint64_t offset, uint64_t length) const override;

private:
  std::vector<uint8_t> bytes_;
};

// Ranged reads through the evidence source; keeps large databases out of
// memory while still manifest-hashing the file.
class EvidencePageSource final : public PageSource {
public:
  EvidencePageSource(const EvidenceSource& source, std::string relative_path)
      : source_(source), relative_path_(std::move(relative_path)) {}
  uint64_t size() const override { return source_.file_size(relative_path_); }
  std::vector<uint8_t> read(uint64_t offset, uint64_t length) const override {
    return source_.read_range(relative_path_, offset, length);
  }

private:
  const EvidenceSource& source_;
  std::string relative_path_;
};

// One parsed database: an immutable view over the byte content. Traversal
// of one database is single-threaded per stream; carving may fan out
// across pages.
class Database {
public:
  Database(std::shared_ptr<const PageSource> source, std::string db_path_label);

  const DbHeader& header() const { return header_; }
  const std::string& path_label() const { return path_label_; }

  std::vector<uint8_t> page(uint32_t page_number) const;  // 1-based
  BtreePage parse_btree_page(uint32_t page_number) const;

  std::vector<SchemaObject> read_schema();

  std::vector<SqliteRecord> walk_table(uint32_t root_page);
  void walk_table(uint32_t root_page, const std::function<void(SqliteRecord&&)>& sink);

  std::vector<SqliteRecord> carve_deleted(const CarveOptions& options = {});
  // Straightforward single-threaded page scan, kept as the reference
  // implementation for the parallel path.
  std::vector<SqliteRecord> carve_deleted_serial(const CarveOptions& options = {});

  std::vector<PageClass> classify_pages();

  const std::vector<Anomaly>& anomalies() const { return anomalies_; }

  std::string decode_text(std::span<const uint8_t> bytes) const;

private:
  struct CellPayload {
    std::vector<uint8_t> bytes;
    bool truncated = false;
    std::vector<uint32_t> overflow_pages;
  };

  void note(uint32_t page, const std::string& kind, const std::string& detail);
  CellPayload assemble_payload(std::span<const uint8_t> page_bytes, size_t local_offset,
                               uint64_t payload_len, uint32_t page_number, bool index_page);
  std::optional<SqliteRecord> decode_record(std::span<const uint8_t> payload, bool truncated,
                                            uint32_t page_number, uint32_t byte_offset);
  void walk_tree(uint32_t page_number, std::vector<uint32_t>& visited_stack,
                 std::vector<char>& visited, const std::function<void(SqliteRecord&&)>& sink);
  std::vector<uint32_t> freelist_pages(std::vector<char>* trunk_flags = nullptr) const;

  std::shared_ptr<const PageSource> source_;
  std::string path_label_;
  DbHeader header_;
  std::vector<Anomaly> anomalies_;
  std::optional<std::vector<SchemaObject>> schema_cache_;
  std::optional<std::vector<PageClass>> class_cache_;
};

// Internal record-decoding helpers shared by traversal and carving;
// exposed for the unit tests.
struct SerialTypeInfo {
  uint64_t width = 0;
  bool valid = false;
};
SerialTypeInfo serial_type_info(uint64_t serial_type);
CellValue decode_serial_value(uint64_t serial_type, std::span<const uint8_t> bytes, size_t offset,
                              TextEncoding encoding, bool allow_truncated);

}  // namespace streamtrace::sqlite
