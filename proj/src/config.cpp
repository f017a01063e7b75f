#include "parkloc/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "parkloc/error.hpp"

namespace parkloc {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw Error(ErrorKind::InvalidConfig, std::string(key) + ": expected a boolean, got '" +
                                              std::string(v) + "'");
}

std::size_t parse_count(std::string_view key, std::string_view v) {
    std::size_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw Error(ErrorKind::InvalidConfig, std::string(key) + ": expected a non-negative integer, got '" +
                                                  std::string(v) + "'");
    }
    return out;
}

}  // namespace

void validate(const PipelineConfig& config) {
    if (config.filter_capacity < 2) {
        throw Error(ErrorKind::InvalidConfig, "filter.capacity must be at least 2");
    }
    if (config.reset_after_rejections < 1) {
        throw Error(ErrorKind::InvalidConfig, "filter.reset_after_rejections must be at least 1");
    }
}

void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "filter.capacity") {
        config.filter_capacity = parse_count(key, value);
    } else if (key == "filter.reset_after_rejections") {
        config.reset_after_rejections = parse_count(key, value);
    } else if (key == "filter.per_camera") {
        config.per_camera_filter = parse_bool(key, value);
    } else if (key == "afm") {
        config.afm = parse_bool(key, value);
    } else if (key == "mcrp") {
        config.mcrp = parse_bool(key, value);
    } else if (key == "mcap") {
        config.mcap = parse_bool(key, value);
    } else if (key == "timing") {
        config.measure_latency = parse_bool(key, value);
    } else if (key == "map") {
        config.map_path = std::string(value);
    } else if (key == "rig") {
        config.rig_path = std::string(value);
    } else {
        throw Error(ErrorKind::InvalidConfig, "unknown key '" + std::string(key) + "'");
    }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::InvalidConfig,
                        "line " + std::to_string(line_no) + ": expected key = value");
        }
        apply_setting(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string dump_config(const PipelineConfig& c) {
    std::ostringstream out;
    out << "filter.capacity = " << c.filter_capacity << '\n'
        << "filter.reset_after_rejections = " << c.reset_after_rejections << '\n'
        << "filter.per_camera = " << (c.per_camera_filter ? "true" : "false") << '\n'
        << "afm = " << (c.afm ? "true" : "false") << '\n'
        << "mcrp = " << (c.mcrp ? "true" : "false") << '\n'
        << "mcap = " << (c.mcap ? "true" : "false") << '\n'
        << "timing = " << (c.measure_latency ? "true" : "false") << '\n';
    if (!c.map_path.empty()) out << "map = " << c.map_path << '\n';
    if (!c.rig_path.empty()) out << "rig = " << c.rig_path << '\n';
    return out.str();
}

}  // namespace parkloc
