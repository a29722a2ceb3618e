#include "glc/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "glc/errors.hpp"

namespace glc {
namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

struct KeyedValue {
    std::string value;
    int line;
    bool consumed = false;
};

class ConfigTable {
  public:
    ConfigTable(const std::string& text, std::string display_name)
        : name_(std::move(display_name)) {
        std::stringstream ss(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw data_error(name_ + ":" + std::to_string(lineno) +
                                     ": malformed section header '" + line + "'");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw data_error(name_ + ":" + std::to_string(lineno) + ": empty section name");
                sections_.insert(section);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw data_error(name_ + ":" + std::to_string(lineno) +
                                 ": expected 'key = value', got '" + line + "'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw data_error(name_ + ":" + std::to_string(lineno) + ": empty key");
            if (section.empty())
                throw data_error(name_ + ":" + std::to_string(lineno) + ": key '" + key +
                                 "' appears before any [section] header");
            const std::string full = section + "." + key;
            if (entries_.count(full))
                throw data_error(name_ + ":" + std::to_string(lineno) + ": duplicate key '" +
                                 full + "'");
            entries_[full] = KeyedValue{value, lineno};
        }
    }

    bool has_section(const std::string& s) const { return sections_.count(s) != 0; }

    const std::string* find(const std::string& full_key) {
        auto it = entries_.find(full_key);
        if (it == entries_.end()) return nullptr;
        it->second.consumed = true;
        return &it->second.value;
    }

    std::string require(const std::string& full_key) {
        const std::string* v = find(full_key);
        if (!v) throw data_error(name_ + ": missing required key '" + full_key + "'");
        return *v;
    }

    double number(const std::string& full_key, const std::string& raw) const {
        char* end = nullptr;
        const double v = std::strtod(raw.c_str(), &end);
        if (end == raw.c_str() || *end != '\0')
            throw data_error(name_ + ": key '" + full_key + "': cannot parse number from '" +
                             raw + "'");
        return v;
    }

    double get_number(const std::string& key, double fallback) {
        const std::string* v = find(key);
        return v ? number(key, *v) : fallback;
    }

    int64_t get_int(const std::string& key, int64_t fallback) {
        const std::string* v = find(key);
        if (!v) return fallback;
        const double d = number(key, *v);
        const int64_t i = static_cast<int64_t>(d);
        if (static_cast<double>(i) != d)
            throw data_error(name_ + ": key '" + key + "': expected integer, got '" + *v + "'");
        return i;
    }

    bool get_bool(const std::string& key, bool fallback) {
        const std::string* v = find(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw data_error(name_ + ": key '" + key + "': expected boolean, got '" + *v + "'");
    }

    std::string get_string(const std::string& key, const std::string& fallback) {
        const std::string* v = find(key);
        return v ? *v : fallback;
    }

    // Verifies every provided key was recognized.
    void finish(const std::set<std::string>& known_sections) const {
        for (const auto& s : sections_)
            if (!known_sections.count(s))
                throw data_error(name_ + ": unknown section '[" + s + "]'");
        for (const auto& [key, kv] : entries_)
            if (!kv.consumed)
                throw data_error(name_ + ":" + std::to_string(kv.line) + ": unknown key '" + key +
                                 "'");
    }

    const std::string& display_name() const { return name_; }

  private:
    std::string name_;
    std::map<std::string, KeyedValue> entries_;
    std::set<std::string> sections_;
};

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& display_name) {
    ConfigTable t(text, display_name);
    ExperimentConfig cfg;

    // [graph]
    cfg.graph.kind = t.require("graph.kind");
    if (cfg.graph.kind != "ba" && cfg.graph.kind != "ws" && cfg.graph.kind != "holme-kim" &&
        cfg.graph.kind != "kronecker")
        throw data_error(display_name + ": key 'graph.kind': unknown generator '" +
                         cfg.graph.kind + "' (expected ba | ws | holme-kim | kronecker)");
    cfg.graph.nodes = static_cast<int32_t>(t.get_int("graph.nodes", 0));
    if (cfg.graph.nodes <= 0)
        throw data_error(display_name + ": key 'graph.nodes': must be a positive integer");
    cfg.graph.k = static_cast<int32_t>(t.get_int("graph.k", 0));
    cfg.graph.edges_target = t.get_int("graph.edges_target", 0);
    cfg.graph.beta = t.get_number("graph.beta", cfg.graph.beta);
    cfg.graph.p_triad = t.get_number("graph.p_triad", cfg.graph.p_triad);
    cfg.graph.power = static_cast<int32_t>(t.get_int("graph.power", 0));
    if (const std::string* v = t.find("graph.initiator")) {
        const auto parts = split_commas(*v);
        if (parts.size() != 4)
            throw data_error(display_name +
                             ": key 'graph.initiator': expected 4 comma-separated numbers");
        for (size_t i = 0; i < 4; ++i)
            cfg.graph.initiator[i] = t.number("graph.initiator", parts[i]);
    }
    cfg.graph.name = t.get_string("graph.name",
                                  cfg.graph.kind + std::to_string(cfg.graph.nodes));
    if (cfg.graph.kind != "kronecker" && cfg.graph.k <= 0 && cfg.graph.edges_target <= 0)
        throw data_error(display_name +
                         ": key 'graph.k': need graph.k or graph.edges_target for generator '" +
                         cfg.graph.kind + "'");

    // [model]
    const std::string model_kind = t.require("model.kind");
    try {
        cfg.model.kind = model_from_name(model_kind);
    } catch (const std::exception&) {
        throw data_error(display_name + ": key 'model.kind': unknown model '" + model_kind +
                         "' (expected ic | voter | cice | logistic)");
    }
    cfg.model.epsilon = t.get_number("model.epsilon", cfg.model.epsilon);
    cfg.model.threshold = t.get_number("model.threshold", cfg.model.threshold);
    cfg.model.horizon = static_cast<int32_t>(t.get_int("model.horizon", cfg.model.horizon));
    cfg.model.validate();

    // [weights]
    cfg.weight_low = t.get_number("weights.low", cfg.weight_low);
    cfg.weight_high = t.get_number("weights.high", cfg.weight_high);
    cfg.weak_prob = t.get_number("weights.weak_prob", cfg.weak_prob);
    cfg.weak_low = t.get_number("weights.weak_low", cfg.weak_low);
    cfg.weak_high = t.get_number("weights.weak_high", cfg.weak_high);
    if (!(cfg.weight_low <= cfg.weight_high))
        throw data_error(display_name + ": key 'weights.low': weight range is empty");

    // [run]
    {
        const std::string raw = t.require("run.n_list");
        for (const std::string& part : split_commas(raw)) {
            const double d = t.number("run.n_list", part);
            const auto n = static_cast<int64_t>(d);
            if (static_cast<double>(n) != d || n <= 0)
                throw data_error(display_name +
                                 ": key 'run.n_list': entries must be positive integers");
            cfg.n_list.push_back(n);
        }
        if (cfg.n_list.empty())
            throw data_error(display_name + ": key 'run.n_list': list is empty");
    }
    if (const std::string* v = t.find("run.p_init")) {
        cfg.p_init_list.clear();
        for (const std::string& part : split_commas(*v)) {
            const double p = t.number("run.p_init", part);
            if (!(p > 0.0 && p <= 1.0))
                throw data_error(display_name + ": key 'run.p_init': entries must lie in (0,1]");
            cfg.p_init_list.push_back(p);
        }
        if (cfg.p_init_list.empty())
            throw data_error(display_name + ": key 'run.p_init': list is empty");
    }
    if (const std::string* v = t.find("run.estimators")) {
        cfg.estimators.clear();
        for (const std::string& part : split_commas(*v)) {
            try {
                cfg.estimators.push_back(estimator_from_name(part));
            } catch (const std::exception&) {
                throw data_error(display_name + ": key 'run.estimators': unknown estimator '" +
                                 part + "' (expected sparse-mle | mle | lasso | greedy)");
            }
        }
        if (cfg.estimators.empty())
            throw data_error(display_name + ": key 'run.estimators': list is empty");
    }
    cfg.eta = t.get_number("run.eta", cfg.eta);
    cfg.lambda_rule = t.get_string("run.lambda_rule", cfg.lambda_rule);
    if (cfg.lambda_rule != "theorem" && cfg.lambda_rule != "fixed" && cfg.lambda_rule != "sweep")
        throw data_error(display_name + ": key 'run.lambda_rule': expected theorem | fixed | sweep");
    cfg.lambda_fixed = t.get_number("run.lambda", cfg.lambda_fixed);
    if (const std::string* v = t.find("run.lambda_sweep")) {
        for (const std::string& part : split_commas(*v))
            cfg.lambda_sweep.push_back(t.number("run.lambda_sweep", part));
    }
    if (cfg.lambda_rule == "sweep" && cfg.lambda_sweep.empty())
        throw data_error(display_name +
                         ": key 'run.lambda_sweep': required when run.lambda_rule = sweep");
    cfg.alpha = t.get_number("run.alpha", cfg.alpha);
    cfg.delta = t.get_number("run.delta", cfg.delta);
    cfg.seeds = static_cast<int32_t>(t.get_int("run.seeds", cfg.seeds));
    if (cfg.seeds < 1)
        throw data_error(display_name + ": key 'run.seeds': must be >= 1");
    cfg.master_seed = static_cast<uint64_t>(t.get_int("run.master_seed",
                                                      static_cast<int64_t>(cfg.master_seed)));
    cfg.max_parents = static_cast<int32_t>(t.get_int("run.max_parents", cfg.max_parents));
    cfg.timing = t.get_bool("run.timing", cfg.timing);
    cfg.output_dir = t.get_string("run.output_dir", cfg.output_dir);

    // [solver]
    cfg.solver.max_iterations =
        static_cast<int32_t>(t.get_int("solver.max_iterations", cfg.solver.max_iterations));
    cfg.solver.tolerance = t.get_number("solver.tolerance", cfg.solver.tolerance);
    cfg.solver.eps_clamp = t.get_number("solver.eps_clamp", cfg.solver.eps_clamp);

    t.finish({"graph", "model", "weights", "run", "solver"});
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str(), path);
}

}  // namespace glc
