// SPDX-License-Identifier: MIT
//
// Text plumbing shared by the file formats: 17-significant-digit decimal
// round-trip formatting, strict scalar parsing, atomic file writes, and a
// small indentation-based tree writer for the reports.

#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cvp {

/// Decimal rendering that round-trips IEEE doubles exactly.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Strict double parse: the whole token must be consumed.
inline double parse_double(const std::string& s, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw std::runtime_error("invalid number for " + what + ": '" + s + "'");
    return v;
}

inline long long parse_int(const std::string& s, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw std::runtime_error("invalid integer for " + what + ": '" + s + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE || s.front() == '-')
        throw std::runtime_error("invalid unsigned integer for " + what + ": '" + s + "'");
    return v;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw std::runtime_error("read error on file: " + path);
    return ss.str();
}

/// Atomic write: write to <path>.tmp in the same directory, then rename.
inline void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
        if (ec)
            throw std::runtime_error("cannot create directory " +
                                     target.parent_path().string() + ": " + ec.message());
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open file for writing: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write error on file: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename " + tmp.string() + " to " + path + ": " +
                                 ec.message());
    }
}

/// Line writer with two-space indentation levels for the tree reports.
class TreeWriter {
  public:
    void line(int depth, const std::string& text) {
        for (int i = 0; i < depth; ++i) out_ += "  ";
        out_ += text;
        out_ += '\n';
    }
    void kv(int depth, const std::string& key, const std::string& value) {
        line(depth, key + " " + value);
    }
    void kv(int depth, const std::string& key, double value) { kv(depth, key, fmt17(value)); }
    void kv(int depth, const std::string& key, int value) {
        kv(depth, key, std::to_string(value));
    }
    void kv(int depth, const std::string& key, std::uint64_t value) {
        kv(depth, key, std::to_string(value));
    }
    void kv(int depth, const std::string& key, bool value) {
        kv(depth, key, std::string(value ? "true" : "false"));
    }
    const std::string& str() const { return out_; }

  private:
    std::string out_;
};

} // namespace cvp
