#include "penal/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "penal/errors.hpp"

namespace penal {

namespace {

namespace pt = boost::property_tree;

std::string where(const std::string& source, const std::string& key) { return source + ": " + key; }

double to_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(what + ": '" + text + "' is not a number");
    }
    if (used != text.size() || !std::isfinite(v)) throw ConfigError(what + ": '" + text + "' is not a finite number");
    return v;
}

std::uint64_t to_u64(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
        throw ConfigError(what + ": '" + text + "' is not an unsigned integer");
    return v;
}

bool to_bool(const std::string& text, const std::string& what) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(what + ": '" + text + "' is not a boolean");
}

void reject_unknown(const pt::ptree& section, const std::vector<std::string>& keys, const std::string& what) {
    for (const auto& [k, v] : section)
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw ConfigError(what + ": unknown key '" + k + "'; did you mean '" + nearest_name(k, keys) + "'?");
}

std::string fmt_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    ExperimentConfig cfg;
    for (const auto& [name, section] : tree) {
        if (!section.data().empty()) throw ConfigError(where(source, name) + ": keys must sit inside a section");
        if (name == "run") {
            reject_unknown(section, {"suite", "seed", "workers", "out", "timing"}, where(source, "[run]"));
            cfg.suite = section.get<std::string>("suite", "");
            if (auto s = section.get_optional<std::string>("seed")) cfg.seed = to_u64(*s, where(source, "run.seed"));
            if (auto w = section.get_optional<std::string>("workers")) {
                const auto n = to_u64(*w, where(source, "run.workers"));
                if (n == 0) throw ConfigError(where(source, "run.workers") + ": must be at least 1");
                cfg.workers = static_cast<unsigned>(n);
            }
            cfg.out = section.get<std::string>("out", cfg.out);
            if (auto t = section.get_optional<std::string>("timing")) cfg.timing = to_bool(*t, where(source, "run.timing"));
        } else if (name == "grid") {
            reject_unknown(section, {"dt"}, where(source, "[grid]"));
            if (auto d = section.get_optional<std::string>("dt")) cfg.dt = to_double(*d, where(source, "grid.dt"));
            if (!(cfg.dt > 0.0)) throw ConfigError(where(source, "grid.dt") + ": must be positive");
        } else if (name == "params") {
            for (const auto& [k, v] : section) cfg.params[k] = to_double(v.data(), where(source, "params." + k));
        } else if (name.rfind("family.", 0) == 0 && name.size() > 7) {
            try {
                cfg.families.emplace_back(name.substr(7), parse_family(section));
            } catch (const AdmissibilityError& e) {
                throw ConfigError(where(source, "[" + name + "]") + ": condition " + e.what());
            } catch (const ConfigError& e) {
                throw ConfigError(where(source, "[" + name + "]") + ": " + e.what());
            }
        } else {
            throw ConfigError(where(source, "[" + name + "]") + ": unknown section; did you mean '" +
                              nearest_name(name, {"run", "grid", "params", "family.NAME"}) + "'?");
        }
    }
    try {
        validate_params(cfg.params);
    } catch (const ConfigError& e) {
        throw ConfigError(where(source, "[params]") + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

SuiteOptions suite_options(const ExperimentConfig& cfg) {
    if (!cfg.seed) throw ConfigError("a seed is required (run.seed, --seed or PENAL_SEED)");
    SuiteOptions opt;
    opt.ctx.seed = Seed{*cfg.seed};
    opt.ctx.workers = cfg.workers.value_or(default_workers());
    opt.dt = cfg.dt;
    opt.params = cfg.params;
    opt.families = cfg.families;
    opt.timing = cfg.timing;
    return opt;
}

std::string csv_header() { return "name,t,estimate,se,target,margin,pass,seed,wall_ms,invalid,reason"; }

std::string csv_row(const ResultRow& r) {
    std::string s = quote(r.name);
    for (double v : {r.t, r.estimate, r.se, r.target, r.margin}) s += "," + fmt_real(v);
    s += r.pass ? ",1" : ",0";
    s += "," + std::to_string(r.seed) + "," + fmt_real(r.wall_ms) + "," + std::to_string(r.invalid) + "," + quote(r.reason);
    return s;
}

std::vector<std::filesystem::path> write_reports(const std::vector<ResultRow>& rows, const std::filesystem::path& out,
                                                 const std::string& suite) {
    std::vector<std::string> order;
    std::map<std::string, std::string> body;
    for (const auto& r : rows) {
        if (!body.count(r.experiment)) order.push_back(r.experiment);
        body[r.experiment] += csv_row(r) + "\n";
    }
    const std::filesystem::path dir = out / suite;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
    std::vector<std::filesystem::path> paths;
    for (const auto& e : order) {
        const auto p = dir / (e + ".csv");
        std::ofstream f(p, std::ios::binary);
        f << csv_header() << "\n" << body[e];
        if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
        paths.push_back(p);
    }
    return paths;
}

}  // namespace penal
