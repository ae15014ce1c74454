#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "levylab/error.hpp"

namespace levylab {

const char* param_type_name(ParamType t) noexcept {
    switch (t) {
        case ParamType::integer: return "integer";
        case ParamType::real: return "real";
        case ParamType::text: return "string";
        case ParamType::real_list: return "real_list";
        case ParamType::integer_list: return "integer_list";
        default: return "boolean";
    }
}

namespace {

using P = ParamDef;
using T = ParamType;

std::vector<ParamDef> join(std::initializer_list<std::vector<ParamDef>> parts) {
    std::vector<ParamDef> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<ParamDef> potential_params() {
    return {
        P{"potential", T::text, "quartic", "objective: quartic, double-well or wells", {"quartic", "double-well", "wells"}},
        P{"m1", T::real, "-1", "double-well left minimum", {}},
        P{"s1", T::real, "0", "double-well barrier location", {}},
        P{"m2", T::real, "2", "double-well right minimum", {}},
        P{"c", T::real, "1", "gradient scale for double-well and wells", {}},
        P{"critical_points", T::real_list, "-2,-1,0,1,2", "alternating minima and maxima for wells", {}},
    };
}

std::vector<ParamDef> sde_params(const std::string& alpha, const std::string& eta, const std::string& steps) {
    return {
        P{"alpha", T::real, alpha, "tail index in (1, 2]", {}},
        P{"theta", T::real, "0", "skewness in [-1, 1]", {}},
        P{"eps", T::real, "1", "noise amplitude", {}},
        P{"schedule", T::text, "constant", "step schedule", {"constant", "polynomial"}},
        P{"eta", T::real, eta, "initial step size", {}},
        P{"rho", T::real, "0", "polynomial decay exponent", {}},
        P{"steps", T::integer, steps, "number of iterations", {}},
        P{"w0", T::real, "0", "initial iterate", {}},
        P{"drift_cap", T::real, "inf", "drift substep limit relative to 1+|w|, inf disables", {}},
        P{"blowup_threshold", T::real, "1e6", "|w| beyond which a run stops with a blowup flag", {}},
    };
}

std::vector<ParamDef> approx_params() {
    return {
        P{"h", T::real, "0.05", "mesh width", {}},
        P{"K", T::integer, "200", "truncation length", {}},
        P{"p", T::integer, "0", "forward shift", {}},
        P{"q", T::integer, "0", "backward shift", {}},
        P{"use_h0", T::boolean, "false", "set the mesh to h0(alpha, eps)", {}},
        P{"drift_table_step", T::real, "0", "spline node spacing for the drift; 0 evaluates the stencil every step", {}},
        P{"drift_table_radius", T::real, "5", "half width of the tabulated drift region", {}},
    };
}

std::vector<ParamDef> network_params(const std::string& q_list, const std::string& n_points) {
    return {
        P{"widths", T::integer_list, "1,16,16,16,1", "layer widths n_0 .. n_L", {}},
        P{"activation", T::text, "relu", "hidden activation", {"relu", "elu", "linear"}},
        P{"loss", T::text, "mse", "training loss", {"mse", "cross_entropy"}},
        P{"bias", T::boolean, "true", "include bias terms", {}},
        P{"mode", T::text, "additive", "injection type", {"additive", "multiplicative"}},
        P{"variance", T::real, "0.1", "injection variance at every non-output layer", {}},
        P{"n_points", T::integer, n_points, "dataset size", {}},
        P{"q_list", T::real_list, q_list, "sinusoid frequencies", {}},
    };
}

std::vector<CommandDef> build_commands() {
    std::vector<CommandDef> t;
    t.push_back({"stable-sample", "draw from an alpha-stable law",
                 {P{"alpha", T::real, "1.5", "tail index in (0, 2]", {}}, P{"sigma", T::real, "1", "scale", {}},
                  P{"theta", T::real, "0", "skewness", {}}, P{"mu", T::real, "0", "location", {}},
                  P{"n", T::integer, "10000", "number of draws", {}}}});
    t.push_back({"stable-fit", "maximum-likelihood fit of an alpha-stable law",
                 {P{"input", T::text, "", "one-column CSV of samples; empty draws from the law below", {}},
                  P{"alpha", T::real, "1.5", "generating tail index", {}}, P{"sigma", T::real, "1", "generating scale", {}},
                  P{"theta", T::real, "0.5", "generating skewness", {}}, P{"mu", T::real, "0", "generating location", {}},
                  P{"n", T::integer, "10000", "number of generated draws", {}},
                  P{"fit_mu", T::boolean, "true", "fit the location", {}},
                  P{"standard_errors", T::boolean, "true", "report standard errors", {}}}});
    t.push_back({"simulate", "Euler-Maruyama run of the unmodified dynamics",
                 join({potential_params(), sde_params("1.9", "0.001", "10000")})});
    t.push_back({"afld", "Euler-Maruyama run with the fractional drift",
                 join({potential_params(), sde_params("1.5", "0.001", "10000"), approx_params()})});
    t.push_back({"mode-shift", "stationary modes against the objective minima",
                 join({potential_params(), sde_params("1.9", "0.001", "10000"), approx_params(),
                       {P{"drift", T::text, "unmodified", "dynamics", {"unmodified", "afld"}},
                        P{"burn_in", T::real, "0.1", "fraction of steps discarded", {}},
                        P{"bandwidth", T::text, "auto", "kernel bandwidth or auto", {}},
                        P{"grid_lo", T::real, "-6", "density grid lower end", {}},
                        P{"grid_hi", T::real, "6", "density grid upper end", {}},
                        P{"grid_n", T::integer, "1201", "density grid points", {}},
                        P{"prominence", T::real, "0.01", "minimum mode prominence relative to the peak", {}},
                        P{"match_radius", T::real, "0.5", "largest distance counted as a matched mode", {}}}})});
    t.push_back({"drift-check", "K = 0 reduction of the fractional drift",
                 join({potential_params(),
                       {P{"alpha", T::real, "1.5", "tail index in (1, 2)", {}}, P{"eps", T::real, "1", "noise amplitude", {}},
                        P{"theta", T::real, "0", "skewness", {}}, P{"points", T::integer, "100", "grid points", {}},
                        P{"lo", T::real, "-3", "grid lower end", {}}, P{"hi", T::real, "3", "grid upper end", {}}}})});
    t.push_back({"frac-converge", "shifted Grunwald-Letnikov error against quadrature on exp(-x^2)",
                 {P{"gamma", T::real, "-0.5", "order in (-1, 0)", {}}, P{"theta", T::real, "0.5", "skewness", {}},
                  P{"h_list", T::real_list, "0.2,0.1,0.05,0.025", "mesh widths", {}},
                  P{"K", T::integer, "100000", "truncation length", {}}, P{"p", T::integer, "0", "forward shift", {}},
                  P{"q", T::integer, "0", "backward shift", {}}, P{"w", T::real, "0", "evaluation point", {}},
                  P{"truncation_K", T::integer, "100", "short truncation for the truncation check", {}},
                  P{"truncation_h", T::real, "0.05", "mesh width for the truncation check", {}}}});
    t.push_back({"exit-time", "first exit times from a well",
                 join({potential_params(),
                       {P{"well", T::integer, "0", "well index from the left", {}},
                        P{"alpha", T::real, "1.5", "tail index in (1, 2)", {}}, P{"theta", T::real, "0", "skewness", {}},
                        P{"eps", T::real, "0.5", "noise amplitude", {}}, P{"dt", T::real, "0.005", "time step", {}},
                        P{"max_steps", T::integer, "100000000", "censoring horizon in steps", {}},
                        P{"runs", T::integer, "1000", "exits per replication", {}},
                        P{"delta_exit", T::real_list, "0.05,0.1,0.2", "boundary margins", {}}}})});
    t.push_back({"occupancy", "fraction of time in the right well of a double well",
                 {P{"m1", T::real, "-1", "left minimum", {}}, P{"s1", T::real, "0", "barrier", {}},
                  P{"m2", T::real, "2", "right minimum", {}}, P{"c", T::real, "1", "gradient scale", {}},
                  P{"alpha", T::real, "1.5", "tail index in (1, 2)", {}}, P{"theta", T::real, "0", "skewness", {}},
                  P{"eps", T::real, "0.2", "noise amplitude", {}}, P{"eta", T::real, "0.01", "step size", {}},
                  P{"steps", T::integer, "2000000", "iterations", {}},
                  P{"burn_in", T::real, "0.1", "fraction of steps discarded", {}},
                  P{"w0", T::real, "-1", "initial iterate", {}}, P{"drift_cap", T::real, "0.5", "drift substep limit relative to 1+|w|", {}},
                  P{"blowup_threshold", T::real, "1e6", "blowup radius", {}}}});
    t.push_back({"gni-profile", "implicit gradient noise statistics",
                 join({network_params("5,10,15,20,25,30,35,40,45,50", "256"),
                       {P{"M", T::integer, "256", "reference draws", {}},
                        P{"draws", T::integer, "200", "fresh injection draws", {}},
                        P{"m_max", T::integer, "8", "highest moment order", {}},
                        P{"write_samples", T::boolean, "true", "write the per-weight noise CSV", {}}}})});
    t.push_back({"gni-train", "gradient descent on the marginalized noised objective",
                 join({network_params("1", "256"),
                       {P{"M", T::integer, "16", "injection draws per step", {}},
                        P{"steps", T::integer, "3000", "gradient steps", {}},
                        P{"lr", T::real, "0.5", "learning rate", {}},
                        P{"final_window", T::real, "0.1", "trailing fraction averaged into the final loss", {}}}})});
    t.push_back({"gni-substitute", "training with fitted gradient noise added",
                 join({network_params("1", "256"),
                       {P{"M_big", T::integer, "16", "injection draws per step", {}},
                        P{"M_small", T::integer, "1", "draws of the noisy reference", {}},
                        P{"model", T::text, "stable", "fitted noise law", {"stable", "gaussian", "none"}},
                        P{"refit_every", T::integer, "10", "steps between refits", {}},
                        P{"steps", T::integer, "3000", "gradient steps", {}},
                        P{"lr", T::real, "0.5", "learning rate", {}},
                        P{"final_window", T::real, "0.1", "trailing fraction averaged into the final loss", {}}}})});
    return t;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_real(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && !std::isnan(out);
    } catch (...) {
        return false;
    }
}

bool parse_int(const std::string& s, std::int64_t& out) {
    try {
        std::size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_bool(const std::string& s, bool& out) {
    std::string v = s;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return out = true, true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return out = false, true;
    return false;
}

void check_value(const ParamDef& d, const std::string& v) {
    bool ok = true;
    double r;
    std::int64_t i;
    bool b;
    switch (d.type) {
        case T::integer: ok = parse_int(v, i); break;
        case T::real: ok = parse_real(v, r); break;
        case T::boolean: ok = parse_bool(v, b); break;
        case T::real_list:
            for (const auto& s : split_list(v)) ok = ok && parse_real(s, r);
            break;
        case T::integer_list:
            for (const auto& s : split_list(v)) ok = ok && parse_int(s, i);
            break;
        case T::text:
            ok = d.choices.empty() || std::find(d.choices.begin(), d.choices.end(), v) != d.choices.end();
            break;
    }
    if (!ok) {
        std::ostringstream os;
        os << "invalid " << param_type_name(d.type) << " value '" << v << "' for key '" << d.name << "'";
        if (!d.choices.empty()) {
            os << " (choices:";
            for (const auto& c : d.choices) os << " " << c;
            os << ")";
        }
        fail(Errc::config, os.str());
    }
}

}  // namespace

const std::vector<CommandDef>& command_table() {
    static const std::vector<CommandDef> table = build_commands();
    return table;
}

const std::vector<ParamDef>& run_params() {
    static const std::vector<ParamDef> p = {
        P{"seed", T::integer, "1", "base seed when no seed list is given", {}},
        P{"seeds", T::integer_list, "", "seed list; overrides seed", {}},
        P{"replications", T::integer, "1", "replications per seed", {}},
        P{"workers", T::integer, "1", "concurrent replications", {}},
        P{"out", T::text, "", "output directory; defaults under LEVYLAB_OUTPUT_ROOT", {}},
    };
    return p;
}

const CommandDef& find_command(const std::string& name) {
    for (const auto& c : command_table())
        if (c.name == name) return c;
    fail(Errc::config, "unknown subcommand '" + name + "'");
}

std::string schema_json() {
    using nlohmann::json;
    auto encode = [](const std::vector<ParamDef>& ps) {
        json arr = json::array();
        for (const auto& p : ps) {
            json o{{"name", p.name}, {"type", param_type_name(p.type)}, {"default", p.default_value}, {"help", p.help}};
            if (!p.choices.empty()) o["choices"] = p.choices;
            arr.push_back(o);
        }
        return arr;
    };
    json j;
    j["run"] = encode(run_params());
    j["commands"] = json::array();
    for (const auto& c : command_table())
        j["commands"].push_back({{"name", c.name}, {"help", c.help}, {"params", encode(c.params)}});
    return j.dump();
}

ExperimentConfig::ExperimentConfig(const std::string& subcommand) : def_(&find_command(subcommand)) {
    for (const auto& p : run_params()) run_[p.name] = p.default_value;
    for (const auto& p : def_->params) params_[p.name] = p.default_value;
}

const ParamDef& ExperimentConfig::lookup(const std::string& section, const std::string& key, bool& is_run) const {
    auto find = [&](const std::vector<ParamDef>& ps) -> const ParamDef* {
        for (const auto& p : ps)
            if (p.name == key) return &p;
        return nullptr;
    };
    const ParamDef* d = nullptr;
    if (section.empty()) {
        d = find(def_->params);
        is_run = false;
        if (!d) {
            d = find(run_params());
            is_run = true;
        }
    } else if (section == "run") {
        d = find(run_params());
        is_run = true;
    } else if (section == "params" || section == def_->name) {
        d = find(def_->params);
        is_run = false;
    } else {
        fail(Errc::config, "unknown config section '" + section + "'");
    }
    if (!d) {
        std::string where = section.empty() ? def_->name : section;
        fail(Errc::config, "unknown key '" + key + "' for " + where);
    }
    return *d;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    std::string section, name = key;
    const auto dot = key.find('.');
    if (dot != std::string::npos) {
        section = key.substr(0, dot);
        name = key.substr(dot + 1);
    }
    bool is_run = false;
    const ParamDef& d = lookup(section, name, is_run);
    const std::string v = trim(value);
    if (!(d.type == T::text && d.choices.empty()) && !(d.type == T::integer_list && v.empty())) check_value(d, v);
    (is_run ? run_ : params_)[name] = v;
}

void ExperimentConfig::load_ini(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(Errc::config, origin + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section != "run" && section != "params" && section != def_->name)
                fail(Errc::config, origin + ":" + std::to_string(lineno) + ": unknown config section '" + section + "'");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            fail(Errc::config, origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        try {
            set(section.empty() ? key : section + "." + key, value);
        } catch (const Error& e) {
            fail(Errc::config, origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void ExperimentConfig::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(Errc::config, "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    load_ini(ss.str(), path);
}

std::string ExperimentConfig::get(const std::string& key) const {
    if (auto it = params_.find(key); it != params_.end()) return it->second;
    if (auto it = run_.find(key); it != run_.end()) return it->second;
    fail(Errc::config, "unknown key '" + key + "'");
}

std::int64_t ExperimentConfig::integer(const std::string& key) const {
    std::int64_t v = 0;
    if (!parse_int(get(key), v)) fail(Errc::config, "key '" + key + "' is not an integer");
    return v;
}

double ExperimentConfig::real(const std::string& key) const {
    double v = 0.0;
    if (!parse_real(get(key), v)) fail(Errc::config, "key '" + key + "' is not a real number");
    return v;
}

bool ExperimentConfig::boolean(const std::string& key) const {
    bool v = false;
    if (!parse_bool(get(key), v)) fail(Errc::config, "key '" + key + "' is not a boolean");
    return v;
}

std::vector<double> ExperimentConfig::reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : split_list(get(key))) {
        double v;
        if (!parse_real(s, v)) fail(Errc::config, "key '" + key + "' holds a non-numeric entry");
        out.push_back(v);
    }
    return out;
}

std::vector<std::int64_t> ExperimentConfig::integers(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const auto& s : split_list(get(key))) {
        std::int64_t v;
        if (!parse_int(s, v)) fail(Errc::config, "key '" + key + "' holds a non-integer entry");
        out.push_back(v);
    }
    return out;
}

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
    std::vector<std::uint64_t> out;
    for (auto v : integers("seeds")) {
        if (v < 0) fail(Errc::config, "seeds must be nonnegative");
        out.push_back(static_cast<std::uint64_t>(v));
    }
    if (out.empty()) {
        const auto s = integer("seed");
        if (s < 0) fail(Errc::config, "seed must be nonnegative");
        out.push_back(static_cast<std::uint64_t>(s));
    }
    return out;
}

std::size_t ExperimentConfig::replications() const {
    const auto r = integer("replications");
    if (r < 1) fail(Errc::config, "replications must be at least 1");
    return static_cast<std::size_t>(r);
}

std::size_t ExperimentConfig::workers() const {
    const auto w = integer("workers");
    if (w < 1) fail(Errc::config, "workers must be at least 1");
    return static_cast<std::size_t>(w);
}

std::string ExperimentConfig::output_dir() const {
    const std::string o = get("out");
    if (!o.empty()) return o;
    const char* root = std::getenv("LEVYLAB_OUTPUT_ROOT");
    const std::string base = root && *root ? root : "levylab_out";
    return base + "/" + def_->name;
}

std::string ExperimentConfig::resolved_ini() const {
    std::ostringstream os;
    os << "[run]\n";
    for (const auto& p : run_params()) os << p.name << " = " << run_.at(p.name) << "\n";
    os << "\n[" << def_->name << "]\n";
    for (const auto& p : def_->params) os << p.name << " = " << params_.at(p.name) << "\n";
    return os.str();
}

}  // namespace levylab
