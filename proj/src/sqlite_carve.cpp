// Deleted-record recovery: freeblocks inside live b-tree pages and whole
// freelist pages are scanned for plausible record headers. Best effort by
// design; candidates are validated, never invented.

#include <algorithm>
#include <cstring>

#include "streamtrace/errors.hpp"
#include "streamtrace/sqlite_core.hpp"

namespace streamtrace::sqlite {

namespace {

uint32_t be32(std::span<const uint8_t> b, size_t off) {
  return (static_cast<uint32_t>(b[off]) << 24) | (static_cast<uint32_t>(b[off + 1]) << 16) |
         (static_cast<uint32_t>(b[off + 2]) << 8) | static_cast<uint32_t>(b[off + 3]);
}

// non-throwing varint; returns width 0 on failure
Varint try_varint(std::span<const uint8_t> b, size_t off) {
  if (off >= b.size()) return {0, 0};
  int64_t value = 0;
  for (int i = 0; i < 8; ++i) {
    if (off + i >= b.size()) return {0, 0};
    uint8_t c = b[off + i];
    if ((c & 0x80) == 0) return {(value << 7) | c, i + 1};
    value = (value << 7) | (c & 0x7F);
  }
  if (off + 8 >= b.size()) return {0, 0};
  return {static_cast<int64_t>((static_cast<uint64_t>(value) << 8) | b[off + 8]), 9};
}

struct ParsedHeader {
  std::vector<uint64_t> types;
  size_t header_len = 0;   // includes the size varint
  uint64_t payload_width = 0;
};

// Record header at `off`: size varint followed by serial types that must
// consume the declared size exactly.
bool parse_record_header(std::span<const uint8_t> region, size_t off, uint64_t payload_cap,
                         int min_columns, ParsedHeader& out) {
  Varint hsize = try_varint(region, off);
  if (hsize.width == 0 || hsize.value < hsize.width + 1) return false;
  if (static_cast<uint64_t>(hsize.value) > region.size() - off) return false;
  size_t end = off + static_cast<size_t>(hsize.value);
  size_t pos = off + hsize.width;
  out.types.clear();
  out.payload_width = 0;
  while (pos < end) {
    Varint t = try_varint(region, pos);
    if (t.width == 0 || pos + t.width > end || t.value < 0) return false;
    SerialTypeInfo info = serial_type_info(static_cast<uint64_t>(t.value));
    if (!info.valid || info.width > payload_cap) return false;
    out.types.push_back(static_cast<uint64_t>(t.value));
    out.payload_width += info.width;
    pos += t.width;
  }
  if (pos != end) return false;
  if (static_cast<int>(out.types.size()) < min_columns) return false;
  out.header_len = static_cast<size_t>(hsize.value);
  return true;
}

std::vector<CellValue> decode_values(std::span<const uint8_t> region, size_t value_start,
                                     const std::vector<uint64_t>& types, TextEncoding encoding) {
  std::vector<CellValue> out;
  size_t pos = value_start;
  for (uint64_t t : types) {
    out.push_back(decode_serial_value(t, region, std::min(pos, region.size()), encoding, true));
    pos += static_cast<size_t>(serial_type_info(t).width);
  }
  return out;
}

struct CellCandidate {
  SqliteRecord record;
  size_t start = 0;
  size_t length = 0;
};

// Full-cell form: [payload_len varint][rowid varint?][record header][values].
// The declared payload length must match the parsed header exactly and the
// whole cell must fit inside the region. `with_rowid` selects table-leaf
// cells; index cells carry no rowid.
bool try_full_cell(std::span<const uint8_t> region, size_t off, bool with_rowid,
                   const CarveOptions& opt, TextEncoding encoding, CellCandidate& out) {
  Varint payload_len = try_varint(region, off);
  if (payload_len.width == 0 || payload_len.value < 2) return false;
  if (static_cast<uint64_t>(payload_len.value) > opt.max_payload_bytes * 64) return false;
  size_t pos = off + payload_len.width;
  Varint rowid{0, 0};
  if (with_rowid) {
    rowid = try_varint(region, pos);
    if (rowid.width == 0) return false;
    pos += rowid.width;
  }
  if (pos >= region.size()) return false;
  if (static_cast<uint64_t>(payload_len.value) > region.size() - pos) return false;

  ParsedHeader header;
  if (!parse_record_header(region, pos, opt.max_payload_bytes, opt.min_columns, header))
    return false;
  if (header.header_len + header.payload_width != static_cast<uint64_t>(payload_len.value))
    return false;
  if (header.payload_width == 0) return false;  // value-free candidates are noise

  out.record.values =
      decode_values(region, pos + header.header_len, header.types, encoding);
  if (with_rowid) out.record.rowid = rowid.value;
  out.start = off;
  out.length = pos + static_cast<size_t>(payload_len.value) - off;
  return true;
}

// Tail-aligned recovery for a freed cell whose first four bytes were
// overwritten by the freeblock header. The surviving tail of the
// serial-type array is located and values are aligned to the region end;
// leading columns whose types were destroyed are unrecoverable and simply
// absent from the result.
bool try_tail_aligned(std::span<const uint8_t> region, const CarveOptions& opt,
                      TextEncoding encoding, CellCandidate& out) {
  constexpr size_t kMaxLeadGap = 12;   // widest lost leading value we tolerate
  constexpr size_t kScanWindow = 16;
  size_t size = region.size();
  if (size < 6) return false;
  for (size_t o = 4; o < std::min(size, static_cast<size_t>(4 + kScanWindow)); ++o) {
    // greedy run of valid serial types starting at o
    std::vector<uint64_t> run;
    std::vector<size_t> ends;
    std::vector<uint64_t> widths;
    size_t pos = o;
    uint64_t width_sum = 0;
    while (pos < size) {
      Varint t = try_varint(region, pos);
      if (t.width == 0 || t.value < 0) break;
      SerialTypeInfo info = serial_type_info(static_cast<uint64_t>(t.value));
      if (!info.valid || info.width > opt.max_payload_bytes) break;
      pos += t.width;
      width_sum += info.width;
      run.push_back(static_cast<uint64_t>(t.value));
      ends.push_back(pos);
      widths.push_back(width_sum);
      if (run.size() > 2048) break;
    }
    // longest prefix whose values end exactly at the region end (allowing
    // a small gap for the destroyed leading value); a candidate with no
    // value bytes at all is noise, not a record
    for (size_t k = run.size(); k >= static_cast<size_t>(opt.min_columns); --k) {
      size_t e = ends[k - 1];
      uint64_t w = widths[k - 1];
      if (w == 0) continue;
      if (e + w > size) continue;
      size_t gap = size - (e + w);
      if (gap > kMaxLeadGap) continue;
      std::vector<uint64_t> types(run.begin(), run.begin() + k);
      out.record.values = decode_values(region, size - static_cast<size_t>(w), types, encoding);
      out.start = 0;
      out.length = size;
      return true;
    }
  }
  return false;
}

// Freed cells carry a stale 4-byte freeblock header ([next16][size16])
// written when they were released; coalescing leaves those headers behind
// at every former cell boundary, and the size fields chain to another
// boundary or the region end. Walking that chain recovers per-cell
// subdivision of merged dead regions.
std::vector<size_t> stale_chain_boundaries(std::span<const uint8_t> region) {
  std::vector<char> anchor(region.size() + 1, 0);
  anchor[region.size()] = 1;
  if (region.size() >= 10) {
    for (size_t r = region.size() - 6;; --r) {
      size_t s = (static_cast<size_t>(region[r + 2]) << 8) | region[r + 3];
      if (s >= 6 && r + s <= region.size() && anchor[r + s]) anchor[r] = 1;
      if (r == 0) break;
    }
  }
  std::vector<size_t> bounds{0};
  for (size_t r = 1; r < region.size(); ++r)
    if (anchor[r]) bounds.push_back(r);
  bounds.push_back(region.size());
  return bounds;
}

void carve_subregion(std::span<const uint8_t> region, size_t sub_start, size_t sub_len,
                     size_t region_start, uint32_t page_number, Liveness liveness,
                     bool clobbered, const CarveOptions& opt, TextEncoding encoding,
                     std::vector<SqliteRecord>& out) {
  std::span<const uint8_t> sub{region.data() + sub_start, sub_len};
  size_t found = 0;
  size_t o = 0;
  while (o + 4 < sub.size()) {
    CellCandidate cand;
    bool hit = try_full_cell(sub, o, true, opt, encoding, cand) ||
               try_full_cell(sub, o, false, opt, encoding, cand);
    if (hit) {
      cand.record.page_number = page_number;
      cand.record.liveness = liveness;
      cand.record.byte_offset = static_cast<uint32_t>(region_start + sub_start + cand.start);
      out.push_back(std::move(cand.record));
      ++found;
      o = cand.start + cand.length;
      continue;
    }
    ++o;
  }
  if (clobbered && found == 0) {
    CellCandidate cand;
    if (try_tail_aligned(sub, opt, encoding, cand)) {
      cand.record.page_number = page_number;
      cand.record.liveness = liveness;
      cand.record.byte_offset = static_cast<uint32_t>(region_start + sub_start);
      out.push_back(std::move(cand.record));
    }
  }
}

void carve_region(std::span<const uint8_t> page_bytes, size_t region_start, size_t region_len,
                  uint32_t page_number, Liveness liveness, bool clobbered,
                  const CarveOptions& opt, TextEncoding encoding,
                  std::vector<SqliteRecord>& out) {
  if (region_start >= page_bytes.size()) return;
  region_len = std::min(region_len, page_bytes.size() - region_start);
  std::span<const uint8_t> region{page_bytes.data() + region_start, region_len};

  if (!clobbered) {
    carve_subregion(region, 0, region.size(), region_start, page_number, liveness, false,
                    opt, encoding, out);
    return;
  }
  std::vector<size_t> bounds = stale_chain_boundaries(region);
  for (size_t i = 0; i + 1 < bounds.size(); ++i) {
    size_t len = bounds[i + 1] - bounds[i];
    if (len < 6) continue;
    carve_subregion(region, bounds[i], len, region_start, page_number, liveness, true, opt,
                    encoding, out);
  }
}

enum class CarveMode { Freeblocks, FreelistLeaf, FreelistTrunk };

struct CarveTask {
  uint32_t page_number = 0;
  CarveMode mode = CarveMode::Freeblocks;
};

// One page's worth of carving; independent of every other page, which is
// what the parallel path exploits.
std::vector<SqliteRecord> carve_page(const Database& db, uint32_t page_number,
                                     const CarveOptions& options, CarveMode mode,
                                     std::vector<Anomaly>& anomalies) {
  std::vector<SqliteRecord> out;
  std::vector<uint8_t> data = db.page(page_number);
  std::span<const uint8_t> b{data};
  TextEncoding enc = db.header().text_encoding;

  if (mode == CarveMode::Freeblocks) {
    BtreePage p = db.parse_btree_page(page_number);
    if (p.kind == PageKind::Unknown) return out;
    for (size_t i = 0; i < p.freeblock_offsets.size(); ++i) {
      carve_region(b, p.freeblock_offsets[i], p.freeblock_sizes[i], page_number,
                   Liveness::CarvedFreeblock, /*clobbered=*/true, options, enc, out);
    }
    // the unallocated gap between the cell pointer array and the content
    // area: cells freed at the content boundary are absorbed here, stale
    // freeblock header included
    size_t hdr = (page_number == 1) ? 100 : 0;
    bool interior = p.kind == PageKind::TableInterior || p.kind == PageKind::IndexInterior;
    size_t ptr_end = hdr + (interior ? 12 : 8) + 2ull * p.cell_count;
    size_t content = p.content_start == 0 ? data.size() : p.content_start;
    if (content > ptr_end && content <= data.size())
      carve_region(b, ptr_end, content - ptr_end, page_number, Liveness::CarvedFreeblock,
                   /*clobbered=*/true, options, enc, out);
    return out;
  }

  if (mode == CarveMode::FreelistTrunk) {
    if (data.size() < 8) return out;
    uint32_t leaf_count = be32(b, 4);
    size_t header_len = 8 + 4ull * std::min<uint64_t>(leaf_count, (data.size() - 8) / 4);
    carve_region(b, header_len, data.size() - header_len, page_number,
                 Liveness::CarvedFreelist, /*clobbered=*/false, options, enc, out);
    return out;
  }

  // Freelist leaf: the old page image usually survives intact. If it still
  // parses as a table leaf, decode its cells wholesale; otherwise fall back
  // to a raw scan.
  BtreePage p = db.parse_btree_page(page_number);
  if (p.kind == PageKind::TableLeaf && p.cell_count > 0 &&
      p.cell_offsets.size() == p.cell_count) {
    for (uint16_t off : p.cell_offsets) {
      Varint payload_len = try_varint(b, off);
      if (payload_len.width == 0 || payload_len.value < 0) continue;
      Varint rowid = try_varint(b, off + payload_len.width);
      if (rowid.width == 0) continue;
      size_t start = off + payload_len.width + rowid.width;
      if (start >= data.size()) continue;
      // stale overflow chains are not followed; local bytes only
      size_t local = std::min<size_t>(static_cast<size_t>(payload_len.value),
                                      data.size() - start);
      std::span<const uint8_t> payload{b.data() + start, local};
      ParsedHeader header;
      if (!parse_record_header(payload, 0, options.max_payload_bytes, 1, header)) continue;
      SqliteRecord rec;
      rec.rowid = rowid.value;
      rec.page_number = page_number;
      rec.liveness = Liveness::CarvedFreelist;
      rec.byte_offset = off;
      rec.values = decode_values(payload, header.header_len, header.types, enc);
      out.push_back(std::move(rec));
    }
    if (!out.empty()) return out;
    anomalies.push_back({db.path_label(), page_number, "freelist_leaf_unproductive",
                         "structured parse yielded nothing; raw scanning"});
  }
  carve_region(b, 0, data.size(), page_number, Liveness::CarvedFreelist,
               /*clobbered=*/false, options, enc, out);
  return out;
}

std::vector<CarveTask> build_tasks(Database& db) {
  std::vector<CarveTask> tasks;
  std::vector<PageClass> classes = db.classify_pages();
  // trunk pages need their header skipped; identify them
  std::vector<char> trunk_flag;
  {
    uint32_t t = db.header().freelist_head;
    trunk_flag.assign(db.header().page_count + 1, 0);
    std::vector<char> seen(db.header().page_count + 1, 0);
    int guard = 0;
    while (t != 0 && t <= db.header().page_count && !seen[t] &&
           guard++ < static_cast<int>(db.header().page_count) + 8) {
      seen[t] = 1;
      trunk_flag[t] = 1;
      std::vector<uint8_t> data = db.page(t);
      if (data.size() < 4) break;
      t = be32(data, 0);
    }
  }
  for (const PageClass& pc : classes) {
    switch (pc.kind) {
      case PageClassKind::Schema:
      case PageClassKind::Table:
      case PageClassKind::Index:
        tasks.push_back({pc.page_number, CarveMode::Freeblocks});
        break;
      case PageClassKind::Freelist:
        tasks.push_back({pc.page_number, trunk_flag[pc.page_number]
                                             ? CarveMode::FreelistTrunk
                                             : CarveMode::FreelistLeaf});
        break;
      default:
        break;
    }
  }
  return tasks;
}

}  // namespace

std::vector<SqliteRecord> Database::carve_deleted_serial(const CarveOptions& options) {
  std::vector<CarveTask> tasks = build_tasks(*this);
  std::vector<SqliteRecord> out;
  for (const CarveTask& task : tasks) {
    std::vector<Anomaly> local;
    std::vector<SqliteRecord> got = carve_page(*this, task.page_number, options,
                                               task.mode, local);
    out.insert(out.end(), std::make_move_iterator(got.begin()),
               std::make_move_iterator(got.end()));
    anomalies_.insert(anomalies_.end(), local.begin(), local.end());
  }
  return out;
}

std::vector<SqliteRecord> Database::carve_deleted(const CarveOptions& options) {
  if (!options.parallel) return carve_deleted_serial(options);
  std::vector<CarveTask> tasks = build_tasks(*this);
  std::vector<std::vector<SqliteRecord>> buckets(tasks.size());
  std::vector<std::vector<Anomaly>> anomaly_buckets(tasks.size());

#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < tasks.size(); ++i) {
    buckets[i] = carve_page(*this, tasks[i].page_number, options, tasks[i].mode,
                            anomaly_buckets[i]);
  }

  std::vector<SqliteRecord> out;
  for (size_t i = 0; i < tasks.size(); ++i) {
    out.insert(out.end(), std::make_move_iterator(buckets[i].begin()),
               std::make_move_iterator(buckets[i].end()));
    anomalies_.insert(anomalies_.end(), anomaly_buckets[i].begin(), anomaly_buckets[i].end());
  }
  return out;
}

}  // namespace streamtrace::sqlite
