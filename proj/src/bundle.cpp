// SPDX-License-Identifier: Apache-2.0
#include "ptest/bundle.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ptest {

namespace fs = std::filesystem;

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    std::string s(buf, res.ptr);
    // Prefer the shortest representation when it still round-trips.
    const auto shortest = std::to_chars(buf, buf + sizeof buf, v);
    std::string t(buf, shortest.ptr);
    return t.size() < s.size() ? t : s;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot write " + p.string());
    out << content;
    if (!out) throw InputError("write failed for " + p.string());
}

std::string matrix_csv(const LossTable& table, std::size_t o) {
    std::string s;
    const std::size_t c = table.config_count();
    for (std::size_t k = 0; k < c; ++k) {
        if (k) s += ',';
        s += std::to_string(k);
    }
    s += '\n';
    for (std::size_t e = 0; e < table.example_count(); ++e) {
        const auto row = table.row(o, e);
        for (std::size_t k = 0; k < c; ++k) {
            if (k) s += ',';
            s += format_number(row[k]);
        }
        s += '\n';
    }
    return s;
}

std::vector<double> parse_matrix(const std::string& text, const fs::path& file, std::size_t rows, std::size_t cols) {
    std::vector<double> out;
    out.reserve(rows * cols);
    std::size_t pos = 0;
    std::size_t line = 0;
    auto next_line = [&](std::string_view& sv) {
        if (pos >= text.size()) return false;
        auto end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        sv = std::string_view(text).substr(pos, end - pos);
        if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
        pos = end + 1;
        ++line;
        return true;
    };
    auto where = [&] { return file.string() + ":" + std::to_string(line); };

    std::string_view sv;
    if (!next_line(sv)) throw InputError(file.string() + ": empty matrix file");
    std::size_t header_cols = sv.empty() ? 0 : 1;
    for (const char ch : sv) header_cols += ch == ',' ? 1 : 0;
    if (header_cols != cols)
        throw InputError(where() + ": header has " + std::to_string(header_cols) + " columns, expected " +
                         std::to_string(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!next_line(sv))
            throw InputError(file.string() + ": expected " + std::to_string(rows) + " data rows, found " +
                             std::to_string(r));
        std::size_t k = 0;
        const char* p = sv.data();
        const char* end = sv.data() + sv.size();
        while (true) {
            double v = 0.0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc()) throw InputError(where() + ": column " + std::to_string(k) + ": not a number");
            if (!(v >= 0.0 && v <= 1.0))
                throw InputError(where() + ": column " + std::to_string(k) + ": loss outside [0,1]");
            out.push_back(v);
            ++k;
            p = res.ptr;
            if (p == end) break;
            if (*p != ',') throw InputError(where() + ": column " + std::to_string(k) + ": expected ','");
            ++p;
        }
        if (k != cols)
            throw InputError(where() + ": " + std::to_string(k) + " columns, expected " + std::to_string(cols));
    }
    while (next_line(sv))
        if (!sv.empty()) throw InputError(where() + ": unexpected extra row");
    return out;
}

}  // namespace

json read_json_file(const fs::path& path) {
    const auto text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_bundle(const fs::path& dir, const LossTable& table, const std::vector<BundleObjective>& objectives) {
    fs::create_directories(dir);
    json manifest;
    manifest["format"] = "ptest-loss-table";
    manifest["version"] = 1;
    manifest["example_count"] = table.example_count();
    manifest["config_count"] = table.config_count();
    if (table.grid()) manifest["grid"] = *table.grid();
    json objs = json::array();
    for (std::size_t o = 0; o < table.objective_count(); ++o) {
        const auto& id = table.objective_ids()[o];
        BundleObjective meta{id, false, std::nullopt};
        for (const auto& b : objectives)
            if (b.id == id) meta = b;
        const auto file = id + ".csv";
        const auto csv = matrix_csv(table, o);
        write_file(dir / file, csv);
        json jo{{"id", id}, {"controlled", meta.controlled}, {"file", file}, {"checksum", fnv1a_hex(csv)}};
        if (meta.alpha) jo["alpha"] = *meta.alpha;
        objs.push_back(std::move(jo));
    }
    manifest["objectives"] = std::move(objs);
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Bundle read_bundle(const fs::path& dir) {
    const auto mpath = dir / "manifest.json";
    if (!fs::exists(mpath)) throw InputError(mpath.string() + ": not found");
    const auto m = read_json_file(mpath);
    auto field = [&](const char* name) -> const json& {
        if (!m.contains(name)) throw InputError(mpath.string() + ": missing field '" + name + "'");
        return m.at(name);
    };
    std::size_t rows = 0, cols = 0;
    std::optional<ConfigGrid> grid;
    try {
        rows = field("example_count").get<std::size_t>();
        cols = field("config_count").get<std::size_t>();
        if (m.contains("grid")) grid = m.at("grid").get<ConfigGrid>();
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InputError(mpath.string() + ": " + e.what());
    }
    if (grid && grid->size() != cols) throw InputError(mpath.string() + ": field 'grid' size does not match config_count");

    Bundle b;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> mats;
    const auto& objs = field("objectives");
    if (!objs.is_array() || objs.empty()) throw InputError(mpath.string() + ": field 'objectives' must be a non-empty array");
    for (std::size_t i = 0; i < objs.size(); ++i) {
        const auto& jo = objs[i];
        const auto ctx = mpath.string() + ": objectives[" + std::to_string(i) + "]";
        if (!jo.contains("id") || !jo.contains("file")) throw InputError(ctx + ": needs 'id' and 'file'");
        BundleObjective meta;
        meta.id = jo.at("id").get<std::string>();
        meta.controlled = jo.value("controlled", false);
        if (jo.contains("alpha")) meta.alpha = jo.at("alpha").get<double>();
        const auto file = dir / jo.at("file").get<std::string>();
        const auto text = read_file(file);
        if (jo.contains("checksum") && jo.at("checksum").get<std::string>() != fnv1a_hex(text))
            throw InputError(file.string() + ": checksum mismatch");
        mats.push_back(parse_matrix(text, file, rows, cols));
        ids.push_back(meta.id);
        b.objectives.push_back(std::move(meta));
    }
    try {
        b.table = LossTable(std::move(ids), rows, cols, std::move(mats), std::move(grid));
    } catch (const std::exception& e) {
        throw InputError(mpath.string() + ": " + e.what());
    }
    return b;
}

}  // namespace ptest
