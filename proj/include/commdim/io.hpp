#pragma once

// Line-oriented input with transparent decompression, plus small TSV helpers.

#include <zlib.h>

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#ifdef COMMDIM_HAVE_ZSTD
#include <zstd.h>
#endif

#include "commdim/common.hpp"

namespace commdim {

class LineSource {
 public:
  virtual ~LineSource() = default;
  // Returns false at end of input. Lines are stripped of '\n' and '\r'.
  virtual bool next(std::string& line) = 0;
};

namespace detail {
inline void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}
}  // namespace detail

class StreamLines final : public LineSource {
 public:
  explicit StreamLines(std::istream& in) : in_(in) {}
  bool next(std::string& line) override {
    if (!std::getline(in_, line)) {
      if (in_.bad()) throw InputError("stream read failure");
      return false;
    }
    detail::strip_cr(line);
    return true;
  }

 private:
  std::istream& in_;
};

class FileLines final : public LineSource {
 public:
  explicit FileLines(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw InputError("cannot open input file: " + path);
  }
  bool next(std::string& line) override {
    if (!std::getline(in_, line)) {
      if (in_.bad()) throw InputError("file read failure");
      return false;
    }
    detail::strip_cr(line);
    return true;
  }

 private:
  std::ifstream in_;
};

class GzipLines final : public LineSource {
 public:
  explicit GzipLines(const std::string& path)
      : f_(gzopen(path.c_str(), "rb")), path_(path) {
    if (!f_) throw InputError("cannot open gzip file: " + path);
    gzbuffer(f_, 1 << 17);
  }
  ~GzipLines() override {
    if (f_) gzclose(f_);
  }
  GzipLines(const GzipLines&) = delete;
  GzipLines& operator=(const GzipLines&) = delete;

  bool next(std::string& line) override {
    line.clear();
    char buf[1 << 14];
    for (;;) {
      if (gzgets(f_, buf, sizeof buf) == nullptr) {
        int errnum = 0;
        const char* msg = gzerror(f_, &errnum);
        if (errnum != Z_OK && errnum != Z_STREAM_END)
          throw InputError("gzip read failure in " + path_ + ": " + msg);
        if (line.empty()) return false;
        detail::strip_cr(line);
        return true;  // final line without newline
      }
      line += buf;
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        detail::strip_cr(line);
        return true;
      }
    }
  }

 private:
  gzFile f_;
  std::string path_;
};

#ifdef COMMDIM_HAVE_ZSTD
// Decompresses the whole .zst member into memory, then serves lines from it.
class ZstdLines final : public LineSource {
 public:
  explicit ZstdLines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open zstd file: " + path);
    std::ostringstream raw;
    raw << in.rdbuf();
    const std::string compressed = raw.str();
    ZSTD_DStream* ds = ZSTD_createDStream();
    ZSTD_initDStream(ds);
    ZSTD_inBuffer zin{compressed.data(), compressed.size(), 0};
    std::vector<char> chunk(1 << 17);
    while (zin.pos < zin.size) {
      ZSTD_outBuffer zout{chunk.data(), chunk.size(), 0};
      const std::size_t rc = ZSTD_decompressStream(ds, &zout, &zin);
      if (ZSTD_isError(rc)) {
        ZSTD_freeDStream(ds);
        throw InputError("zstd decode failure in " + path + ": " +
                         ZSTD_getErrorName(rc));
      }
      buf_.append(chunk.data(), zout.pos);
    }
    ZSTD_freeDStream(ds);
    stream_.str(buf_);
  }
  bool next(std::string& line) override {
    if (!std::getline(stream_, line)) return false;
    detail::strip_cr(line);
    return true;
  }

 private:
  std::string buf_;
  std::istringstream stream_;
};
#endif

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

// Opens a line source, picking decompression by file extension.
inline std::unique_ptr<LineSource> open_lines(const std::string& path) {
  if (ends_with(path, ".gz")) return std::make_unique<GzipLines>(path);
  if (ends_with(path, ".zst") || ends_with(path, ".zstd")) {
#ifdef COMMDIM_HAVE_ZSTD
    return std::make_unique<ZstdLines>(path);
#else
    throw InputError("input '" + path + "' is zstd-compressed but this build "
                     "has no zstd support");
#endif
  }
  return std::make_unique<FileLines>(path);
}

// Reads the whole (possibly compressed) file into one buffer.
inline std::string read_file_bytes(const std::string& path) {
  if (ends_with(path, ".gz") || ends_with(path, ".zst") ||
      ends_with(path, ".zstd")) {
    auto src = open_lines(path);
    std::string out, line;
    while (src->next(line)) {
      out += line;
      out += '\n';
    }
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file: " + path);
  std::ostringstream raw;
  raw << in.rdbuf();
  if (in.bad()) throw InputError("file read failure: " + path);
  return raw.str();
}

// Splits on '\t' into string_views over `line`. Returns field count.
inline std::size_t split_tsv(std::string_view line,
                             std::vector<std::string_view>& fields) {
  fields.clear();
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields.size();
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Strict base-10 signed integer parse of the full field.
inline bool parse_i64(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
    if (s.size() == 1) return false;
  }
  std::int64_t v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = neg ? -v : v;
  return true;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + path);
  return out;
}

}  // namespace commdim
