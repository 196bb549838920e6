#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "control.hpp"
#include "design.hpp"
#include "path.hpp"
#include "simulate.hpp"

namespace latstab {

/// Configuration rejection with the offending file and line in the message.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, const std::string& what)
        : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what
                                      : source + ": " + what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace detail

/// Flat block-structured key-value document: [section] headers, key = value
/// lines, # comments. Unknown sections and keys are rejected, with the line.
class ConfigDoc {
public:
    static ConfigDoc parse_string(const std::string& text, const std::string& source_name) {
        ConfigDoc doc;
        doc.source_ = source_name;
        std::istringstream in(text);
        std::string raw;
        int line_no = 0;
        std::string section;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string line = raw;
            const size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError(source_name, line_no, "malformed section header '" + raw + "'");
                section = detail::trim(line.substr(1, line.size() - 2));
                if (section.empty()) throw ConfigError(source_name, line_no, "empty section name");
                doc.sections_[section];  // section may legitimately stay empty
                continue;
            }
            const size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(source_name, line_no, "expected 'key = value', got '" + raw + "'");
            if (section.empty())
                throw ConfigError(source_name, line_no, "key-value pair before any [section]");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError(source_name, line_no, "empty key");
            if (value.empty()) throw ConfigError(source_name, line_no, "empty value for '" + key + "'");
            auto& sec = doc.sections_[section];
            if (sec.count(key))
                throw ConfigError(source_name, line_no, "duplicate key '" + key + "'");
            sec[key] = {value, line_no};
        }
        return doc;
    }

    static ConfigDoc parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path, 0, "cannot open file");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    const std::string& source() const { return source_; }

    bool has_section(const std::string& s) const { return sections_.count(s) > 0; }
    bool has_key(const std::string& s, const std::string& k) const {
        auto it = sections_.find(s);
        return it != sections_.end() && it->second.count(k) > 0;
    }

    std::string require_string(const std::string& sec, const std::string& key) const {
        auto it = sections_.find(sec);
        if (it == sections_.end()) throw ConfigError(source_, 0, "missing [" + sec + "] section");
        auto kt = it->second.find(key);
        if (kt == it->second.end())
            throw ConfigError(source_, 0, "missing key '" + key + "' in [" + sec + "]");
        return kt->second.value;
    }

    std::string string_or(const std::string& sec, const std::string& key,
                          const std::string& fallback) const {
        return has_key(sec, key) ? require_string(sec, key) : fallback;
    }

    double require_double(const std::string& sec, const std::string& key) const {
        return to_double(sec, key, require_string(sec, key));
    }
    double double_or(const std::string& sec, const std::string& key, double fallback) const {
        return has_key(sec, key) ? require_double(sec, key) : fallback;
    }

    int require_int(const std::string& sec, const std::string& key) const {
        const std::string v = require_string(sec, key);
        try {
            size_t pos = 0;
            const int r = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (const std::exception&) {
            throw ConfigError(source_, line_of(sec, key), "key '" + key + "': '" + v +
                                                              "' is not an integer");
        }
    }
    int int_or(const std::string& sec, const std::string& key, int fallback) const {
        return has_key(sec, key) ? require_int(sec, key) : fallback;
    }

    bool bool_or(const std::string& sec, const std::string& key, bool fallback) const {
        if (!has_key(sec, key)) return fallback;
        const std::string v = require_string(sec, key);
        if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
        if (v == "false" || v == "no" || v == "off" || v == "0") return false;
        throw ConfigError(source_, line_of(sec, key), "key '" + key + "': '" + v +
                                                          "' is not a boolean");
    }

    std::vector<double> require_double_list(const std::string& sec, const std::string& key) const {
        const std::string v = require_string(sec, key);
        std::vector<double> out;
        std::istringstream in(v);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = detail::trim(item);
            if (item.empty())
                throw ConfigError(source_, line_of(sec, key), "key '" + key + "': empty list item");
            out.push_back(to_double(sec, key, item));
        }
        if (out.empty())
            throw ConfigError(source_, line_of(sec, key), "key '" + key + "': empty list");
        return out;
    }

    int line_of(const std::string& sec, const std::string& key) const {
        auto it = sections_.find(sec);
        if (it == sections_.end()) return 0;
        auto kt = it->second.find(key);
        return kt == it->second.end() ? 0 : kt->second.line;
    }

    /// Rejects sections and keys outside the given schema, naming the line.
    void enforce_schema(const std::map<std::string, std::set<std::string>>& schema) const {
        for (const auto& [sec, keys] : sections_) {
            auto it = schema.find(sec);
            if (it == schema.end()) throw ConfigError(source_, 0, "unknown section [" + sec + "]");
            for (const auto& [key, entry] : keys)
                if (!it->second.count(key))
                    throw ConfigError(source_, entry.line,
                                      "unknown key '" + key + "' in [" + sec + "]");
        }
    }

private:
    struct Entry {
        std::string value;
        int line = 0;
    };

    double to_double(const std::string& sec, const std::string& key, const std::string& v) const {
        try {
            size_t pos = 0;
            const double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (const std::exception&) {
            throw ConfigError(source_, line_of(sec, key), "key '" + key + "': '" + v +
                                                              "' is not a number");
        }
    }

    std::string source_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

enum class PathKind { constant_curvature, lane_change, default_track };

struct OutputOptions {
    std::string directory = "out";
    bool trajectory_csv = true;
    bool norms_csv = true;
    bool certificate = true;
    bool path_csv = false;
    bool learned_csv = false;
};

/// Fully validated scenario description built from a config document.
struct ScenarioConfig {
    VehicleParams params;
    GainSet gains;
    bool kff_auto = false;

    PathKind path_kind = PathKind::default_track;
    double curvature = 0.0;      // constant_curvature
    double path_length = 0.0;    // constant_curvature
    std::vector<double> lane_offsets;    // lane_change
    std::vector<double> change_lengths;  // lane_change
    double straight_length = 200.0;      // lane_change

    int platoon_size = 2;
    Strategy strategy = Strategy::lfp_dt;
    double step = 0.01;
    std::optional<DelaySpec> delay;

    std::optional<DesignSpec> design;
    OutputOptions outputs;

    DesiredPath build_path() const {
        switch (path_kind) {
            case PathKind::constant_curvature:
                return make_constant_curvature(curvature, path_length, std::min(step, 0.01));
            case PathKind::lane_change:
                return make_lane_change_track(lane_offsets, change_lengths, straight_length,
                                              std::min(step, 0.01));
            case PathKind::default_track:
                return default_lane_change_track(std::min(step, 0.01));
        }
        throw std::logic_error("unreachable");
    }

    Scenario build_scenario() const {
        Scenario sc;
        sc.params = params;
        sc.gains = gains;
        sc.strategy = strategy;
        sc.platoon_size = platoon_size;
        sc.path = build_path();
        sc.dl = step;
        sc.delay = delay;
        sc.validate();
        return sc;
    }

    static ScenarioConfig from_doc(const ConfigDoc& doc) {
        static const std::map<std::string, std::set<std::string>> schema = {
            {"vehicle",
             {"mass_kg", "yaw_inertia_kgm2", "cornering_front_nprad", "cornering_rear_nprad",
              "cg_to_front_m", "cg_to_rear_m", "speed_mps"}},
            {"path",
             {"type", "curvature_1pm", "length_m", "n_changes", "lane_offset_m",
              "lane_offsets_m", "change_length_m", "change_lengths_m", "straight_length_m"}},
            {"gains",
             {"k_lat", "k_heading", "k_lat_dot", "k_heading_dot", "k_ff", "k_lp", "k_ld",
              "output", "k_lp_row", "k_ld_row"}},
            {"platoon", {"size", "strategy", "step_m", "spacing_m", "delay_s"}},
            {"design",
             {"k_lp_min", "k_lp_max", "k_ld_min", "k_ld_max", "coarse_points", "refine_points"}},
            {"outputs",
             {"directory", "trajectory_csv", "norms_csv", "certificate", "path_csv",
              "learned_csv"}},
        };
        doc.enforce_schema(schema);

        ScenarioConfig c;
        c.params.m = doc.require_double("vehicle", "mass_kg");
        c.params.iz = doc.require_double("vehicle", "yaw_inertia_kgm2");
        c.params.cf = doc.require_double("vehicle", "cornering_front_nprad");
        c.params.cr = doc.require_double("vehicle", "cornering_rear_nprad");
        c.params.a = doc.require_double("vehicle", "cg_to_front_m");
        c.params.b = doc.require_double("vehicle", "cg_to_rear_m");
        c.params.vx = doc.require_double("vehicle", "speed_mps");
        try {
            c.params.validate();
        } catch (const std::exception& e) {
            throw ConfigError(doc.source(), 0, std::string("[vehicle]: ") + e.what());
        }

        c.gains.kp = {doc.require_double("gains", "k_lat"), doc.require_double("gains", "k_heading")};
        c.gains.kd = {doc.double_or("gains", "k_lat_dot", 0.0),
                      doc.double_or("gains", "k_heading_dot", 0.0)};
        const std::string kff = doc.string_or("gains", "k_ff", "auto");
        if (kff == "auto") {
            c.kff_auto = true;
            c.gains.kff = kff_formula(c.params, c.gains.kp[1]);
        } else {
            std::istringstream is(kff);
            if (!(is >> c.gains.kff) || !is.eof())
                throw ConfigError(doc.source(), doc.line_of("gains", "k_ff"),
                                  "k_ff must be a number or 'auto'");
        }
        const std::string output = doc.string_or("gains", "output", "lateral");
        if (output == "lateral") {
            c.gains.output = OutputSelector::lateral;
        } else if (output == "vector") {
            c.gains.output = OutputSelector::full_vector;
        } else {
            throw ConfigError(doc.source(), doc.line_of("gains", "output"),
                              "output must be 'lateral' or 'vector'");
        }
        c.gains.klp = doc.double_or("gains", "k_lp", 0.0);
        c.gains.kld = doc.double_or("gains", "k_ld", 0.0);
        if (doc.has_key("gains", "k_lp_row")) {
            const auto row = doc.require_double_list("gains", "k_lp_row");
            if (row.size() != 2)
                throw ConfigError(doc.source(), doc.line_of("gains", "k_lp_row"),
                                  "k_lp_row needs exactly 2 entries");
            c.gains.klp_row = {row[0], row[1]};
        }
        if (doc.has_key("gains", "k_ld_row")) {
            const auto row = doc.require_double_list("gains", "k_ld_row");
            if (row.size() != 2)
                throw ConfigError(doc.source(), doc.line_of("gains", "k_ld_row"),
                                  "k_ld_row needs exactly 2 entries");
            c.gains.kld_row = {row[0], row[1]};
        }

        const std::string type = doc.require_string("path", "type");
        if (type == "constant_curvature") {
            c.path_kind = PathKind::constant_curvature;
            c.curvature = doc.require_double("path", "curvature_1pm");
            c.path_length = doc.require_double("path", "length_m");
        } else if (type == "lane_change") {
            c.path_kind = PathKind::lane_change;
            c.straight_length = doc.double_or("path", "straight_length_m", 200.0);
            if (doc.has_key("path", "change_lengths_m")) {
                c.change_lengths = doc.require_double_list("path", "change_lengths_m");
            }
            if (doc.has_key("path", "lane_offsets_m")) {
                c.lane_offsets = doc.require_double_list("path", "lane_offsets_m");
            }
            if (c.lane_offsets.empty()) {
                const int n = doc.int_or("path", "n_changes", 4);
                if (n < 1)
                    throw ConfigError(doc.source(), doc.line_of("path", "n_changes"),
                                      "n_changes must be >= 1");
                const double off = doc.require_double("path", "lane_offset_m");
                for (int i = 0; i < n; ++i) c.lane_offsets.push_back(i % 2 == 0 ? off : -off);
            }
            if (c.change_lengths.empty()) {
                const double len = doc.require_double("path", "change_length_m");
                c.change_lengths.assign(c.lane_offsets.size(), len);
            }
            if (c.change_lengths.size() != c.lane_offsets.size())
                throw ConfigError(doc.source(), doc.line_of("path", "change_lengths_m"),
                                  "need one change length per lane offset");
        } else if (type == "default_track") {
            c.path_kind = PathKind::default_track;
        } else {
            throw ConfigError(doc.source(), doc.line_of("path", "type"),
                              "path type must be constant_curvature, lane_change, or default_track");
        }

        c.platoon_size = doc.require_int("platoon", "size");
        const std::string strat = doc.require_string("platoon", "strategy");
        if (strat == "lfp_dt") {
            c.strategy = Strategy::lfp_dt;
        } else if (strat == "ff_pt") {
            c.strategy = Strategy::ff_pt;
        } else {
            throw ConfigError(doc.source(), doc.line_of("platoon", "strategy"),
                              "strategy must be 'lfp_dt' or 'ff_pt'");
        }
        c.step = doc.double_or("platoon", "step_m", 0.01);
        const bool has_spacing = doc.has_key("platoon", "spacing_m");
        const bool has_delay = doc.has_key("platoon", "delay_s");
        if (has_spacing != has_delay)
            throw ConfigError(doc.source(), 0, "spacing_m and delay_s must be given together");
        if (has_spacing)
            c.delay = DelaySpec{doc.require_double("platoon", "spacing_m"),
                                doc.require_double("platoon", "delay_s")};

        if (doc.has_section("design")) {
            DesignSpec d;
            d.params = c.params;
            d.kp = c.gains.kp;
            d.kd = c.gains.kd;
            d.kff = c.gains.kff;
            d.klp_min = doc.require_double("design", "k_lp_min");
            d.klp_max = doc.require_double("design", "k_lp_max");
            d.kld_min = doc.require_double("design", "k_ld_min");
            d.kld_max = doc.require_double("design", "k_ld_max");
            d.coarse_points = doc.int_or("design", "coarse_points", 21);
            d.refine_points = doc.int_or("design", "refine_points", 21);
            try {
                d.validate();
            } catch (const std::exception& e) {
                throw ConfigError(doc.source(), 0, std::string("[design]: ") + e.what());
            }
            c.design = d;
        }

        c.outputs.directory = doc.string_or("outputs", "directory", "out");
        c.outputs.trajectory_csv = doc.bool_or("outputs", "trajectory_csv", true);
        c.outputs.norms_csv = doc.bool_or("outputs", "norms_csv", true);
        c.outputs.certificate = doc.bool_or("outputs", "certificate", true);
        c.outputs.path_csv = doc.bool_or("outputs", "path_csv", false);
        c.outputs.learned_csv = doc.bool_or("outputs", "learned_csv", false);
        return c;
    }

    static ScenarioConfig load(const std::string& path) {
        return from_doc(ConfigDoc::parse_file(path));
    }
};

}  // namespace latstab
