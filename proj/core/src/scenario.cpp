#include "riscrlb/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace riscrlb {

namespace {

using nlohmann::json;

Position3D position_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) {
        throw ConfigError("field '" + field + "' must be an array of 3 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json position_to_json(const Position3D& p) {
    return json::array({p.x, p.y, p.z});
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& context) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.contains(it.key())) {
            throw ConfigError("unknown key '" + it.key() + "' in " + context);
        }
    }
}

template <typename T>
void read_if_present(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

} // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    static const std::set<std::string> known = {
        "wavelength", "antenna_spacing", "n_tx",       "n_rx",          "bs_pos",
        "ms_pos",     "ris",             "snr_db",     "slots",         "seed",
        "pilot_mode", "ris_sides",       "ms_x_interval", "ms_y_interval", "position_steps",
        "seeds"};
    reject_unknown_keys(j, known, "config");

    ScenarioConfig cfg;
    try {
        read_if_present(j, "wavelength", cfg.wavelength);
        read_if_present(j, "antenna_spacing", cfg.antenna_spacing);
        read_if_present(j, "n_tx", cfg.n_tx);
        read_if_present(j, "n_rx", cfg.n_rx);
        if (j.contains("bs_pos")) {
            cfg.bs_pos = position_from_json(j.at("bs_pos"), "bs_pos");
        }
        if (j.contains("ms_pos")) {
            cfg.ms_pos = position_from_json(j.at("ms_pos"), "ms_pos");
        }
        if (j.contains("ris")) {
            const json& r = j.at("ris");
            reject_unknown_keys(r, {"rows", "cols", "spacing", "reference"}, "ris");
            read_if_present(r, "rows", cfg.ris.rows);
            read_if_present(r, "cols", cfg.ris.cols);
            read_if_present(r, "spacing", cfg.ris.element_spacing);
            if (r.contains("reference")) {
                cfg.ris.reference = position_from_json(r.at("reference"), "ris.reference");
            }
        }
        read_if_present(j, "snr_db", cfg.snr_db);
        read_if_present(j, "slots", cfg.slots);
        read_if_present(j, "seed", cfg.seed);
        read_if_present(j, "pilot_mode", cfg.pilot_mode);
        read_if_present(j, "ris_sides", cfg.ris_sides);
        if (j.contains("ms_x_interval")) {
            auto v = j.at("ms_x_interval").get<std::vector<double>>();
            if (v.size() != 2) {
                throw ConfigError("ms_x_interval must have 2 entries");
            }
            cfg.ms_x_interval = {v[0], v[1]};
        }
        if (j.contains("ms_y_interval")) {
            auto v = j.at("ms_y_interval").get<std::vector<double>>();
            if (v.size() != 2) {
                throw ConfigError("ms_y_interval must have 2 entries");
            }
            cfg.ms_y_interval = {v[0], v[1]};
        }
        read_if_present(j, "position_steps", cfg.position_steps);
        read_if_present(j, "seeds", cfg.seeds);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field has wrong type: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string ScenarioConfig::to_json_text() const {
    json j;
    j["wavelength"] = wavelength;
    j["antenna_spacing"] = antenna_spacing;
    j["n_tx"] = n_tx;
    j["n_rx"] = n_rx;
    j["bs_pos"] = position_to_json(bs_pos);
    j["ms_pos"] = position_to_json(ms_pos);
    j["ris"] = {{"rows", ris.rows},
                {"cols", ris.cols},
                {"spacing", ris.element_spacing},
                {"reference", position_to_json(ris.reference)}};
    j["snr_db"] = snr_db;
    j["slots"] = slots;
    j["seed"] = seed;
    j["pilot_mode"] = pilot_mode;
    j["ris_sides"] = ris_sides;
    j["ms_x_interval"] = {ms_x_interval[0], ms_x_interval[1]};
    j["ms_y_interval"] = {ms_y_interval[0], ms_y_interval[1]};
    j["position_steps"] = position_steps;
    j["seeds"] = seeds;
    return j.dump(2) + "\n";
}

ArrayConfig ScenarioConfig::array() const {
    return {n_tx, n_rx, antenna_spacing, wavelength};
}

PilotMode ScenarioConfig::pilot() const {
    if (pilot_mode == "random") {
        return PilotMode::random;
    }
    if (pilot_mode == "constant") {
        return PilotMode::constant;
    }
    if (pilot_mode == "steered") {
        return PilotMode::steered;
    }
    throw ConfigError("pilot_mode must be 'steered', 'random' or 'constant'");
}

double ScenarioConfig::transmit_power(double snr_db_value) const {
    return n_rx * std::pow(10.0, snr_db_value / 10.0) * noise_variance();
}

void ScenarioConfig::validate() const {
    if (!(wavelength > 0.0) || !(antenna_spacing > 0.0)) {
        throw ConfigError("wavelength and antenna_spacing must be positive");
    }
    if (n_tx < 1 || n_rx < 1) {
        throw ConfigError("n_tx and n_rx must be positive");
    }
    if (snr_db.empty()) {
        throw ConfigError("snr_db list must be non-empty");
    }
    if (slots.empty()) {
        throw ConfigError("slots list must be non-empty");
    }
    for (int l : slots) {
        if (l < 1) {
            throw ConfigError("slot counts must be >= 1");
        }
    }
    if (ris_sides.empty()) {
        throw ConfigError("ris_sides list must be non-empty");
    }
    for (int side : ris_sides) {
        if (side < 1) {
            throw ConfigError("ris_sides entries must be >= 1");
        }
    }
    if (position_steps < 2) {
        throw ConfigError("position_steps must be >= 2");
    }
    if (seeds < 1) {
        throw ConfigError("seeds must be >= 1");
    }
    pilot(); // validates pilot_mode
    // Expanding the layout and constructing the geometry applies the
    // remaining invariants (z signs, degeneracy).
    ScenarioGeometry(bs_pos, ms_pos, expand_layout(ris));
}

PilotMatrix build_pilot(const ScenarioConfig& cfg, const ScenarioGeometry& geometry, int slots,
                        double power, std::uint64_t seed) {
    const PilotMode mode = cfg.pilot();
    if (mode == PilotMode::steered) {
        return make_steered_pilot(cfg.array(), slots, power,
                                  mean_departure_rate(geometry, cfg.array()));
    }
    return make_pilot(cfg.array(), slots, power, seed, mode);
}

} // namespace riscrlb
