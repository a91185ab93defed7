#include "dirsim/config_io.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace dirsim {

namespace {

using nlohmann::json;

Vec3 parse_vec3(const json& j, const char* key) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError(std::string(key) + ": expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

NmseMode parse_nmse_mode(const std::string& name) {
    if (name == "literal") return NmseMode::kLiteral;
    if (name == "per-matrix") return NmseMode::kPerMatrix;
    throw ConfigError("nmse_mode must be \"literal\" or \"per-matrix\"");
}

SystemConfig parse_config(std::istream& is) {
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");

    static const std::set<std::string> known = {
        "n", "m1", "m2", "k", "bs_pos", "irs2_pos", "irs1_pos", "user_pos",
        "gamma0_db", "alpha_near", "alpha_far", "noise_dbm", "tx_dbm",
        "trials", "seed", "nmse_mode", "sv_tol", "degeneracy_floor"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("unknown config key: " + key);

    SystemConfig cfg;
    try {
        if (j.contains("n")) cfg.n = j["n"].get<int>();
        if (j.contains("m1")) cfg.m1 = j["m1"].get<int>();
        if (j.contains("m2")) cfg.m2 = j["m2"].get<int>();
        if (j.contains("k")) cfg.k = j["k"].get<int>();
        if (j.contains("bs_pos")) cfg.bs_pos = parse_vec3(j["bs_pos"], "bs_pos");
        if (j.contains("irs2_pos")) cfg.irs2_pos = parse_vec3(j["irs2_pos"], "irs2_pos");
        if (j.contains("irs1_pos")) cfg.irs1_pos = parse_vec3(j["irs1_pos"], "irs1_pos");
        if (j.contains("user_pos")) cfg.user_pos = parse_vec3(j["user_pos"], "user_pos");
        if (j.contains("gamma0_db"))
            cfg.gamma0 = std::pow(10.0, j["gamma0_db"].get<double>() / 10.0);
        if (j.contains("alpha_near")) cfg.alpha_near = j["alpha_near"].get<double>();
        if (j.contains("alpha_far")) cfg.alpha_far = j["alpha_far"].get<double>();
        if (j.contains("noise_dbm")) cfg.noise_dbm = j["noise_dbm"].get<double>();
        if (j.contains("tx_dbm")) cfg.tx_dbm = j["tx_dbm"].get<double>();
        if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("nmse_mode"))
            cfg.nmse_mode = parse_nmse_mode(j["nmse_mode"].get<std::string>());
        if (j.contains("sv_tol")) cfg.sv_tol = j["sv_tol"].get<double>();
        if (j.contains("degeneracy_floor"))
            cfg.degeneracy_floor = j["degeneracy_floor"].get<double>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config value error: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

SystemConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    return parse_config(f);
}

std::string config_to_json(const SystemConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["m1"] = cfg.m1;
    j["m2"] = cfg.m2;
    j["k"] = cfg.k;
    j["bs_pos"] = {cfg.bs_pos.x, cfg.bs_pos.y, cfg.bs_pos.z};
    j["irs2_pos"] = {cfg.irs2_pos.x, cfg.irs2_pos.y, cfg.irs2_pos.z};
    j["irs1_pos"] = {cfg.irs1_pos.x, cfg.irs1_pos.y, cfg.irs1_pos.z};
    j["user_pos"] = {cfg.user_pos.x, cfg.user_pos.y, cfg.user_pos.z};
    j["gamma0_db"] = 10.0 * std::log10(cfg.gamma0);
    j["alpha_near"] = cfg.alpha_near;
    j["alpha_far"] = cfg.alpha_far;
    j["noise_dbm"] = cfg.noise_dbm;
    j["tx_dbm"] = cfg.tx_dbm;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["nmse_mode"] = cfg.nmse_mode == NmseMode::kLiteral ? "literal" : "per-matrix";
    j["sv_tol"] = cfg.sv_tol;
    j["degeneracy_floor"] = cfg.degeneracy_floor;
    return j.dump(2);
}

}  // namespace dirsim
