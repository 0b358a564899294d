#pragma once

/// @file config.hpp
/// @brief Flat `key = value` configuration files and overrides.
///
/// One assignment per line, `#` starts a comment, blank lines are ignored.
/// Unknown keys are rejected. Missing keys keep the RunConfig defaults.
/// `to_config_text` writes every key with exact (17-digit) reals, so its
/// output reproduces the same RunConfig when parsed again.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <smol/runner.hpp>
#include <smol/schedules.hpp>

namespace smol {

class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& key, const std::string& message)
        : std::invalid_argument("config key '" + key + "': " + message), _key(key)
    {
    }
    const std::string& key() const { return _key; }

private:
    std::string _key;
};

namespace config_detail {

inline std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

inline double to_real(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError(key, "expected a real number, got '" + v + "'");
    return out;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v)
{
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1")
        return true;
    if (v == "false" || v == "0")
        return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

inline std::string real_text(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field real_field(T RunConfig::*outer, double T::*inner)
{
    return {[=](RunConfig& c, const std::string& v) { (c.*outer).*inner = to_real("", v); },
            [=](const RunConfig& c) { return real_text((c.*outer).*inner); }};
}

inline Field real_field(double RunConfig::*member)
{
    return {[=](RunConfig& c, const std::string& v) { c.*member = to_real("", v); },
            [=](const RunConfig& c) { return real_text(c.*member); }};
}

template <typename T, typename U>
Field uint_field(T RunConfig::*outer, U T::*inner)
{
    return {[=](RunConfig& c, const std::string& v) { (c.*outer).*inner = static_cast<U>(to_uint("", v)); },
            [=](const RunConfig& c) { return std::to_string((c.*outer).*inner); }};
}

template <typename U>
Field uint_field(U RunConfig::*member)
{
    return {[=](RunConfig& c, const std::string& v) { c.*member = static_cast<U>(to_uint("", v)); },
            [=](const RunConfig& c) { return std::to_string(c.*member); }};
}

inline std::string sizes_text(const std::vector<std::size_t>& sizes)
{
    std::string s;
    for (std::size_t h : sizes)
        s += (s.empty() ? "" : ",") + std::to_string(h);
    return s;
}

inline std::vector<std::size_t> parse_sizes(const std::string& v)
{
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(static_cast<std::size_t>(to_uint("", trim(item))));
    return out;
}

/// Every accepted key, in the order run_meta lists them.
inline const std::vector<std::pair<std::string, Field>>& fields()
{
    using RC = RunConfig;
    static const std::vector<std::pair<std::string, Field>> table = [] {
        std::vector<std::pair<std::string, Field>> t;
        t.emplace_back("task", Field{[](RC& c, const std::string& v) { c.task = v; },
                                     [](const RC& c) { return c.task; }});
        t.emplace_back("seed", uint_field(&RC::seed));
        t.emplace_back("output_dir", Field{[](RC& c, const std::string& v) { c.output_dir = v; },
                                           [](const RC& c) { return c.output_dir; }});
        t.emplace_back("workers", uint_field(&RC::workers));
        t.emplace_back("k", uint_field(&RC::k));
        t.emplace_back("batch_size", uint_field(&RC::batch_size));
        t.emplace_back("generations_per_phase", uint_field(&RC::generations_per_phase));
        t.emplace_back("init_sigma", real_field(&RC::init_sigma));
        t.emplace_back("cvt_samples", uint_field(&RC::cvt_samples));
        t.emplace_back("cvt_seed", uint_field(&RC::cvt_seed));
        t.emplace_back("sigma_iso", real_field(&RC::variation, &VariationParams::sigma_iso));
        t.emplace_back("sigma_line", real_field(&RC::variation, &VariationParams::sigma_line));

        // Applying "schedule" replaces the kind with its default parameters,
        // so it is always applied before constant_alpha / random_lo / random_hi.
        t.emplace_back("schedule",
                       Field{[](RC& c, const std::string& v) {
                                 try {
                                     c.schedule.kind = parse_schedule_name(v);
                                 } catch (const std::invalid_argument& e) {
                                     throw ConfigError("schedule", e.what());
                                 }
                             },
                             [](const RC& c) { return std::string(schedule_name(c.schedule.kind)); }});
        t.emplace_back("constant_alpha",
                       Field{[](RC& c, const std::string& v) {
                                 if (auto* k = std::get_if<schedule::Constant>(&c.schedule.kind))
                                     k->alpha = to_real("", v);
                             },
                             [](const RC& c) {
                                 const auto* k = std::get_if<schedule::Constant>(&c.schedule.kind);
                                 return k ? real_text(k->alpha) : std::string();
                             }});
        t.emplace_back("random_lo",
                       Field{[](RC& c, const std::string& v) {
                                 if (auto* k = std::get_if<schedule::RandomUniform>(&c.schedule.kind))
                                     k->lo = to_real("", v);
                             },
                             [](const RC& c) {
                                 const auto* k = std::get_if<schedule::RandomUniform>(&c.schedule.kind);
                                 return k ? real_text(k->lo) : std::string();
                             }});
        t.emplace_back("random_hi",
                       Field{[](RC& c, const std::string& v) {
                                 if (auto* k = std::get_if<schedule::RandomUniform>(&c.schedule.kind))
                                     k->hi = to_real("", v);
                             },
                             [](const RC& c) {
                                 const auto* k = std::get_if<schedule::RandomUniform>(&c.schedule.kind);
                                 return k ? real_text(k->hi) : std::string();
                             }});
        t.emplace_back("total_phases", uint_field(&RC::schedule, &ScheduleConfig::total_phases));
        t.emplace_back("final_fixed_phases", uint_field(&RC::schedule, &ScheduleConfig::final_fixed_phases));
        t.emplace_back("extinction_sigma", real_field(&RC::schedule, &ScheduleConfig::extinction_sigma));
        t.emplace_back("human_peak_fraction", real_field(&RC::schedule, &ScheduleConfig::human_peak_fraction));

        t.emplace_back("arm_joints", uint_field(&RC::arm, &tasks::ScaledArmParams::n_joints));
        t.emplace_back("arm_joint_limit", real_field(&RC::arm, &tasks::ScaledArmParams::joint_limit));

        using CP = tasks::CrawlerParams;
        t.emplace_back("crawler_masses", uint_field(&RC::crawler, &CP::n_masses));
        t.emplace_back("crawler_mass", real_field(&RC::crawler, &CP::mass));
        t.emplace_back("crawler_rest_length", real_field(&RC::crawler, &CP::rest_length));
        t.emplace_back("crawler_spring_k", real_field(&RC::crawler, &CP::spring_k));
        t.emplace_back("crawler_spring_c", real_field(&RC::crawler, &CP::spring_c));
        t.emplace_back("crawler_gear", real_field(&RC::crawler, &CP::gear));
        t.emplace_back("crawler_gravity", real_field(&RC::crawler, &CP::gravity));
        t.emplace_back("crawler_ground_k", real_field(&RC::crawler, &CP::ground_k));
        t.emplace_back("crawler_ground_c", real_field(&RC::crawler, &CP::ground_c));
        t.emplace_back("crawler_friction", real_field(&RC::crawler, &CP::friction));
        t.emplace_back("crawler_dt", real_field(&RC::crawler, &CP::dt));
        t.emplace_back("crawler_episode_steps", uint_field(&RC::crawler, &CP::episode_steps));
        t.emplace_back("crawler_hidden",
                       Field{[](RC& c, const std::string& v) { c.crawler.hidden = parse_sizes(v); },
                             [](const RC& c) { return sizes_text(c.crawler.hidden); }});
        t.emplace_back("trace_best", Field{[](RC& c, const std::string& v) { c.trace_best = to_bool("", v); },
                                           [](const RC& c) { return std::string(c.trace_best ? "true" : "false"); }});
        return t;
    }();
    return table;
}

inline const Field* find_field(std::string_view key)
{
    for (const auto& [name, f] : fields())
        if (name == key)
            return &f;
    return nullptr;
}

/// Validation messages read "<group>: <field> ...". Finds the config key the
/// message is about: a field named verbatim, or the group's key prefix plus a
/// field name ("crawler: dt" is crawler_dt).
inline std::string key_in_message(const std::string& msg)
{
    const auto colon = msg.find(':');
    const std::string group = colon == std::string::npos ? "" : msg.substr(0, colon);
    const std::string prefix = group == "crawler" ? "crawler_" : group == "scaled_arm" ? "arm_" : "";
    std::string word;
    auto check = [&]() -> std::string {
        if (word.empty())
            return {};
        if (find_field(word))
            return word;
        if (!prefix.empty() && find_field(prefix + word))
            return prefix + word;
        return {};
    };
    for (std::size_t i = colon == std::string::npos ? 0 : colon + 1; i <= msg.size(); ++i) {
        const char c = i < msg.size() ? msg[i] : ' ';
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            word += c;
            continue;
        }
        if (auto k = check(); !k.empty())
            return k;
        word.clear();
    }
    if (group == "crawler" && msg.find("hidden") != std::string::npos)
        return "crawler_hidden";
    return group.empty() ? "config" : group;
}

inline std::string strip_group(const std::string& msg)
{
    const auto colon = msg.find(':');
    return colon == std::string::npos ? msg : trim(msg.substr(colon + 1));
}

} // namespace config_detail

/// Ordered key/value assignments; later assignments to a key win.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Splits "key=value". Whitespace around both parts is dropped.
inline std::pair<std::string, std::string> parse_assignment(std::string_view text)
{
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
        throw std::invalid_argument("expected key=value, got '" + std::string(text) + "'");
    auto key = config_detail::trim(text.substr(0, eq));
    if (key.empty())
        throw std::invalid_argument("empty key in '" + std::string(text) + "'");
    return {key, config_detail::trim(text.substr(eq + 1))};
}

inline KeyValues parse_config_text(std::string_view text)
{
    KeyValues out;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (config_detail::trim(line).empty())
            continue;
        try {
            out.push_back(parse_assignment(line));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

inline KeyValues read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

/// Applies assignments on top of `base` and validates the result.
inline RunConfig resolve_config(const KeyValues& assignments, RunConfig base = {})
{
    std::map<std::string, std::string> latest;
    for (const auto& [k, v] : assignments) {
        if (!config_detail::find_field(k))
            throw ConfigError(k, "unknown key");
        latest[k] = v;
    }
    auto apply = [&](const std::string& key) {
        const auto it = latest.find(key);
        if (it == latest.end())
            return;
        try {
            config_detail::find_field(key)->set(base, it->second);
        } catch (const ConfigError& e) {
            // re-tag errors raised without a key
            const std::string msg = e.what();
            const auto pos = msg.find("': ");
            throw ConfigError(key, pos == std::string::npos ? msg : msg.substr(pos + 3));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key, e.what());
        }
    };
    apply("schedule");
    for (const auto& [name, field] : config_detail::fields())
        if (name != "schedule")
            apply(name);

    try {
        base.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(config_detail::key_in_message(e.what()), config_detail::strip_group(e.what()));
    }
    return base;
}

/// Every key with its resolved value. Schedule parameters that do not apply
/// to the configured schedule are omitted.
inline std::string to_config_text(const RunConfig& config)
{
    std::string out;
    for (const auto& [name, field] : config_detail::fields()) {
        const std::string value = field.get(config);
        if (value.empty() && (name == "constant_alpha" || name == "random_lo" || name == "random_hi"))
            continue;
        out += name + " = " + value + "\n";
    }
    return out;
}

} // namespace smol
