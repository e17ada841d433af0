#pragma once

// On-disk cache: one integer CSV per sweep kind plus the validation marker.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "selchain/error.hpp"

namespace selchain::harness {

namespace fs = std::filesystem;

/// $SELCHAIN_CACHE, else ./.selchain-cache
inline fs::path default_cache_dir()
{
    if (const char* env = std::getenv("SELCHAIN_CACHE"); env && *env) return env;
    return ".selchain-cache";
}

using CsvRow = std::vector<std::int64_t>;

/// Append-only integer table with a header row. An empty path disables persistence.
class CsvCache {
public:
    CsvCache(fs::path file, std::vector<std::string> columns) : file_(std::move(file)), columns_(std::move(columns)) {}

    bool enabled() const { return !file_.empty(); }
    const fs::path& path() const { return file_; }

    std::string header() const
    {
        std::string h;
        for (std::size_t i = 0; i < columns_.size(); ++i) h += (i ? "," : "") + columns_[i];
        return h;
    }

    /// All complete rows. A torn final line (no newline) is cut off the file.
    std::vector<CsvRow> load() const
    {
        std::vector<CsvRow> rows;
        if (!enabled() || !fs::exists(file_)) return rows;
        std::ifstream in(file_, std::ios::binary);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        const auto keep = text.rfind('\n');
        if (keep == std::string::npos) {
            fs::remove(file_);
            return rows;
        }
        if (keep + 1 != text.size()) {
            text.resize(keep + 1);
            fs::resize_file(file_, keep + 1);
        }
        std::istringstream ss(text);
        std::string line;
        std::getline(ss, line);
        if (line != header()) throw invariant_error("cache " + file_.string() + " has header '" + line + "'");
        while (std::getline(ss, line)) {
            CsvRow row;
            std::istringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) row.push_back(std::stoll(cell));
            if (row.size() != columns_.size()) throw invariant_error("malformed row in " + file_.string() + ": " + line);
            rows.push_back(std::move(row));
        }
        return rows;
    }

    void append(const std::vector<CsvRow>& rows) const
    {
        if (!enabled()) return;
        if (!file_.parent_path().empty()) fs::create_directories(file_.parent_path());
        const bool fresh = !fs::exists(file_) || fs::file_size(file_) == 0;
        std::ofstream out(file_, std::ios::binary | std::ios::app);
        if (!out) throw std::runtime_error("cannot write " + file_.string());
        if (fresh) out << header() << '\n';
        std::string buf;
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) buf += ',';
                buf += std::to_string(row[i]);
            }
            buf += '\n';
            if (buf.size() > (1u << 20)) {
                out << buf;
                buf.clear();
            }
        }
        out << buf;
        if (!out) throw std::runtime_error("write failed for " + file_.string());
    }

private:
    fs::path file_;
    std::vector<std::string> columns_;
};

} // namespace selchain::harness
