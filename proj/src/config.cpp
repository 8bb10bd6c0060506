#include "shelab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace shelab {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    for (int i = 15; i >= 0; --i) os << ((h >> (4 * i)) & 0xF);
    return os.str();
}

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw std::domain_error("config: " + where + ": " + what);
}

void require_keys(const json& obj, const std::string& where,
                  const std::vector<std::string>& allowed) {
    if (!obj.is_object()) schema_fail(where, "expected an object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const auto& k : allowed)
            if (item.key() == k) ok = true;
        if (!ok) schema_fail(where, "unknown key '" + item.key() + "'");
    }
}

double get_number(const json& obj, const std::string& where, const std::string& key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) schema_fail(where + "." + key, "expected a number");
    return obj[key].get<double>();
}

long get_integer(const json& obj, const std::string& where, const std::string& key,
                 long fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        schema_fail(where + "." + key, "expected an integer");
    return obj[key].get<long>();
}

bool get_bool(const json& obj, const std::string& where, const std::string& key,
              bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) schema_fail(where + "." + key, "expected a boolean");
    return obj[key].get<bool>();
}

std::string get_string(const json& obj, const std::string& where,
                       const std::string& key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) schema_fail(where + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

template <class T>
std::vector<T> get_array(const json& obj, const std::string& where,
                         const std::string& key, std::vector<T> fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_array()) schema_fail(where + "." + key, "expected an array");
    std::vector<T> out;
    for (const auto& v : obj[key]) {
        if (!v.is_number()) schema_fail(where + "." + key, "expected numeric entries");
        out.push_back(v.get<T>());
    }
    return out;
}

} // namespace

RunConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::domain_error("config: expected a JSON object");
    require_keys(doc, "config", {"model", "scheme", "study", "output", "seed"});

    RunConfig cfg;
    const json model = doc.value("model", json::object());
    const json scheme = doc.value("scheme", json::object());
    const json study = doc.value("study", json::object());
    const json output = doc.value("output", json::object());
    const json seed = doc.value("seed", json::object());

    // ---- model ----
    require_keys(model, "model", {"drift", "sigma", "u0", "bc"});
    const json drift = model.value("drift", json({{"type", "zero"}}));
    require_keys(drift, "model.drift", {"type", "b1", "c", "name", "scale"});
    const std::string dtype = get_string(drift, "model.drift", "type", "zero");
    if (dtype == "zero") {
        cfg.model.drift = Drift::zero();
    } else if (dtype == "affine") {
        cfg.model.drift = Drift::affine(get_number(drift, "model.drift", "b1", 0.0),
                                        get_number(drift, "model.drift", "c", 0.0));
    } else if (dtype == "named") {
        cfg.model.drift =
            Drift::named_by_tag(get_string(drift, "model.drift", "name", "sin"),
                                get_number(drift, "model.drift", "scale", 1.0));
    } else {
        schema_fail("model.drift.type", "must be zero, affine, or named");
    }
    cfg.model.sigma = get_number(model, "model", "sigma", 1.0);
    cfg.model.u0 = InitialDatum::named(get_string(model, "model", "u0", "zero"));
    const std::string bc = get_string(model, "model", "bc", "neumann");
    if (bc == "neumann")
        cfg.model.bc = BoundaryCondition::Neumann;
    else if (bc == "dirichlet")
        cfg.model.bc = BoundaryCondition::Dirichlet;
    else
        schema_fail("model.bc", "must be neumann or dirichlet");

    // ---- scheme ----
    require_keys(scheme, "scheme", {"T", "N", "K", "M", "ref_refinement", "strict"});
    cfg.scheme.T = get_number(scheme, "scheme", "T", 1.0);
    cfg.scheme.N = get_integer(scheme, "scheme", "N", 64);
    cfg.scheme.K = int(get_integer(scheme, "scheme", "K", 255));
    cfg.scheme.M = int(get_integer(scheme, "scheme", "M", 1024));
    cfg.scheme.ref_refinement = int(get_integer(scheme, "scheme", "ref_refinement", 6));
    cfg.scheme.strict = get_bool(scheme, "scheme", "strict", true);

    // ---- study ----
    require_keys(study, "study",
                 {"kind", "metric", "x", "ladder", "eps_ladder", "delta_ladder",
                  "z_values", "paths", "test_function", "grid_points", "zeta",
                  "coupled"});
    cfg.study_kind = get_string(study, "study", "kind", "weak");
    if (cfg.study_kind != "weak" && cfg.study_kind != "density" &&
        cfg.study_kind != "affine" && cfg.study_kind != "small_drift" &&
        cfg.study_kind != "asymptotics" && cfg.study_kind != "kernel_checks")
        schema_fail("study.kind",
                    "must be one of weak, density, affine, small_drift, "
                    "asymptotics, kernel_checks");
    const std::string default_metric =
        cfg.study_kind == "density" || cfg.study_kind == "affine" ? "sup_density"
                                                                  : "weak_error";
    cfg.metric = metric_from_string(get_string(study, "study", "metric", default_metric));
    cfg.probe_x = get_number(study, "study", "x", 0.5);
    cfg.ladder = get_array<long>(study, "study", "ladder", {8, 16, 32, 64});
    cfg.eps_ladder =
        get_array<double>(study, "study", "eps_ladder", {0.4, 0.2, 0.1, 0.05});
    cfg.delta_ladder = get_array<double>(study, "study", "delta_ladder",
                                         {1e-3, 1e-4, 1e-5, 1e-6});
    cfg.z_values = get_array<double>(study, "study", "z_values", {-1.0, 0.5, 1.0, 2.0});
    cfg.paths = get_integer(study, "study", "paths", 10000);
    cfg.test_function = get_string(study, "study", "test_function", "tanh");
    TestFunction::parse(cfg.test_function); // validate now
    cfg.grid_points = int(get_integer(study, "study", "grid_points", 1025));
    cfg.zeta_override = get_number(study, "study", "zeta", 0.0);
    cfg.coupled = get_bool(study, "study", "coupled", true);

    // ---- output / seed ----
    require_keys(output, "output", {"dir", "snapshot_paths", "noise_dump"});
    cfg.out_dir = get_string(output, "output", "dir", "");
    cfg.snapshot_paths = get_integer(output, "output", "snapshot_paths", 4);
    cfg.write_noise_dump = get_bool(output, "output", "noise_dump", false);
    require_keys(seed, "seed", {"master"});
    const long master = get_integer(seed, "seed", "master", 1);
    if (master < 0) schema_fail("seed.master", "must be nonnegative");
    cfg.master_seed = std::uint64_t(master);

    // ---- resolved document (defaults filled, keys auto-sorted) ----
    json resolved;
    resolved["model"]["drift"]["type"] = dtype;
    if (dtype == "affine") {
        resolved["model"]["drift"]["b1"] = cfg.model.drift.b1;
        resolved["model"]["drift"]["c"] = cfg.model.drift.c;
    } else if (dtype == "named") {
        resolved["model"]["drift"]["name"] =
            get_string(drift, "model.drift", "name", "sin");
        resolved["model"]["drift"]["scale"] = cfg.model.drift.scale;
    }
    resolved["model"]["sigma"] = cfg.model.sigma;
    resolved["model"]["u0"] = cfg.model.u0.name;
    resolved["model"]["bc"] = bc;
    resolved["scheme"] = {{"T", cfg.scheme.T},
                          {"N", cfg.scheme.N},
                          {"K", cfg.scheme.K},
                          {"M", cfg.scheme.M},
                          {"ref_refinement", cfg.scheme.ref_refinement},
                          {"strict", cfg.scheme.strict}};
    resolved["study"] = {{"kind", cfg.study_kind},
                         {"metric", to_string(cfg.metric)},
                         {"x", cfg.probe_x},
                         {"ladder", cfg.ladder},
                         {"eps_ladder", cfg.eps_ladder},
                         {"delta_ladder", cfg.delta_ladder},
                         {"z_values", cfg.z_values},
                         {"paths", cfg.paths},
                         {"test_function", cfg.test_function},
                         {"grid_points", cfg.grid_points},
                         {"zeta", cfg.zeta_override},
                         {"coupled", cfg.coupled}};
    // output.dir is delivery, not computation: it stays out of the resolved
    // document so the hash identifies the run regardless of where it lands
    resolved["output"] = {{"snapshot_paths", cfg.snapshot_paths},
                          {"noise_dump", cfg.write_noise_dump}};
    resolved["seed"] = {{"master", master}};
    cfg.resolved = resolved;
    cfg.config_hash = fnv1a_hex(resolved.dump());
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::domain_error("config: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw std::domain_error("config: JSON parse error in '" + path +
                                "': " + e.what());
    }
    return parse_config(doc);
}

void apply_override(nlohmann::json& doc, const std::string& dotted_key,
                    const std::string& value) {
    nlohmann::json* node = &doc;
    std::string rest = dotted_key;
    for (;;) {
        const auto dot = rest.find('.');
        if (dot == std::string::npos) break;
        const std::string head = rest.substr(0, dot);
        rest = rest.substr(dot + 1);
        node = &((*node)[head]);
    }
    // parse as JSON literal when possible; fall back to a plain string
    try {
        (*node)[rest] = nlohmann::json::parse(value);
    } catch (const std::exception&) {
        (*node)[rest] = value;
    }
}

} // namespace shelab
