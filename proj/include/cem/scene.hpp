#pragma once

// Scene configuration (JSON), frame output (JSONL), and metrics (CSV).
// Paths inside a scene file are resolved relative to the scene file itself.

#include <filesystem>
#include <iostream>

#include "cem/shape_library.hpp"
#include "cem/world.hpp"

namespace cem {

// configuration problems exit with a distinct code from numerical failures
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SceneConfig {
    std::string name;
    ShapeLibrary library;
    WorldParams params;
    std::vector<HalfPlane> halfplanes;
    struct BodyInit {
        std::string shape;
        Se2State q;
        Se2Velocity v;
        BodyKind kind = BodyKind::dynamic;
        KinematicScript script;
    };
    std::vector<BodyInit> bodies;
    double duration = 1.0;
    int output_stride = 10;
    std::string models_dir;            // neural backend: per-pair model files
    std::optional<double> discharge_y; // grains below this line count as discharged
};

inline std::string model_file_name(std::string a, std::string b) {
    if (b < a) std::swap(a, b);
    return a + "__" + b + ".cem";
}

namespace detail {

inline Vec2 vec2_of(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("expected a 2-vector");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline Vec3 vec3_of(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-vector");
    return {{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}};
}

}  // namespace detail

inline SceneConfig load_scene(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open scene: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ConfigError("scene parse error in " + path + ": " + e.what());
    }
    const auto base = std::filesystem::path(path).parent_path();

    SceneConfig s;
    try {
        s.name = j.value("name", std::filesystem::path(path).stem().string());
        s.library = load_shape_library((base / j.at("shape_library").get<std::string>()).string());

        const auto& p = j.at("params");
        s.params.dt = p.at("dt").get<double>();
        if (!(s.params.dt > 0.0)) throw ConfigError("dt must be positive");
        s.params.gravity = detail::vec2_of(p.at("gravity"));
        const std::string backend = p.value("backend", "oracle");
        if (backend == "oracle")
            s.params.backend = Backend::oracle;
        else if (backend == "neural")
            s.params.backend = Backend::neural;
        else
            throw ConfigError("unknown backend \"" + backend + "\"");
        const auto& c = p.at("contact");
        s.params.contact.k_n = c.at("k_n").get<double>();
        s.params.contact.k_t = c.at("k_t").get<double>();
        s.params.contact.gamma_n = c.value("gamma_n", 0.0);
        s.params.contact.gamma_t = c.value("gamma_t", 0.0);
        s.params.contact.mu = c.at("mu").get<double>();
        if (s.params.contact.k_n <= 0.0 || s.params.contact.k_t <= 0.0 ||
            s.params.contact.gamma_n < 0.0 || s.params.contact.gamma_t < 0.0 ||
            s.params.contact.mu < 0.0)
            throw ConfigError("invalid contact parameters");
        s.params.broadphase_margin = p.value("broadphase_margin", 0.3);
        s.params.eviction_margin = p.value("eviction_margin", s.params.eviction_margin);
        s.params.cache_trust_radius = p.value("cache_trust_radius", s.params.cache_trust_radius);

        s.duration = j.at("duration").get<double>();
        s.output_stride = j.value("output_stride", 10);
        if (s.output_stride < 1) throw ConfigError("output_stride must be >= 1");
        if (j.contains("models_dir"))
            s.models_dir = (base / j.at("models_dir").get<std::string>()).string();
        if (j.contains("discharge_y")) s.discharge_y = j.at("discharge_y").get<double>();

        for (const auto& h : j.value("halfplanes", nlohmann::json::array()))
            s.halfplanes.emplace_back(detail::vec2_of(h.at("normal")),
                                      h.at("offset").get<double>());

        for (const auto& b : j.at("bodies")) {
            SceneConfig::BodyInit init;
            init.shape = b.at("shape").get<std::string>();
            if (!s.library.count(init.shape))
                throw ConfigError("body references unknown shape \"" + init.shape + "\"");
            const Vec3 pose = detail::vec3_of(b.at("pose"));
            init.q = Se2State(pose[0], pose[1], pose[2]);
            if (b.contains("velocity")) {
                const Vec3 v = detail::vec3_of(b.at("velocity"));
                init.v = Se2Velocity(v[0], {v[1], v[2]});
            }
            const std::string kind = b.value("kind", "dynamic");
            if (kind == "dynamic")
                init.kind = BodyKind::dynamic;
            else if (kind == "static")
                init.kind = BodyKind::fixed;
            else if (kind == "kinematic")
                init.kind = BodyKind::kinematic;
            else
                throw ConfigError("unknown body kind \"" + kind + "\"");
            if (b.contains("script")) {
                const auto& sc = b.at("script");
                const std::string type = sc.at("type").get<std::string>();
                if (type == "spin") {
                    init.script.type = KinematicScript::Type::spin;
                    init.script.pivot = detail::vec2_of(sc.at("pivot"));
                    init.script.omega = sc.at("omega").get<double>();
                } else if (type == "slide") {
                    init.script.type = KinematicScript::Type::slide;
                    init.script.vel = detail::vec2_of(sc.at("vel"));
                } else {
                    throw ConfigError("unknown script type \"" + type + "\"");
                }
                init.script.t0 = sc.value("t0", 0.0);
                init.script.t1 = sc.value("t1", std::numeric_limits<double>::infinity());
            }
            if (init.kind == BodyKind::kinematic &&
                init.script.type == KinematicScript::Type::none)
                throw ConfigError("kinematic body without a script");
            s.bodies.push_back(std::move(init));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("scene " + path + ": " + e.what());
    }
    return s;
}

// Builds the world, loading neural maps when required. Throws ConfigError if
// a dynamic-dynamic shape pair lacks a model file.
inline World build_world(const SceneConfig& s) {
    World w;
    w.params = s.params;
    w.halfplanes = s.halfplanes;
    for (const auto& init : s.bodies) {
        Body b;
        b.shape = &s.library.at(init.shape);
        b.q = init.q;
        b.v = init.v;
        b.kind = init.kind;
        b.script = init.script;
        b.script_base = init.q;
        w.bodies.push_back(b);
    }

    // dt stability bound for the penalty springs
    double m_min = std::numeric_limits<double>::infinity();
    for (const auto& b : w.bodies)
        if (b.kind == BodyKind::dynamic) m_min = std::min(m_min, b.mass());
    if (std::isfinite(m_min)) {
        const double bound = 0.2 * std::sqrt(m_min / w.params.contact.k_n);
        if (w.params.dt >= bound)
            std::cerr << "warning: dt=" << w.params.dt << " exceeds the stability bound "
                      << bound << " (0.2 sqrt(m_min/k_n))\n";
    }

    if (s.params.backend == Backend::neural) {
        std::vector<std::string> dyn_shapes;
        for (const auto& init : s.bodies)
            if (init.kind == BodyKind::dynamic) dyn_shapes.push_back(init.shape);
        std::sort(dyn_shapes.begin(), dyn_shapes.end());
        dyn_shapes.erase(std::unique(dyn_shapes.begin(), dyn_shapes.end()), dyn_shapes.end());
        // also load maps that happen to exist for fixed-involved pairs
        std::vector<std::string> all_shapes;
        for (const auto& init : s.bodies) all_shapes.push_back(init.shape);
        std::sort(all_shapes.begin(), all_shapes.end());
        all_shapes.erase(std::unique(all_shapes.begin(), all_shapes.end()), all_shapes.end());

        for (size_t i = 0; i < all_shapes.size(); ++i) {
            for (size_t k = i; k < all_shapes.size(); ++k) {
                const std::string file =
                    (std::filesystem::path(s.models_dir) /
                     model_file_name(all_shapes[i], all_shapes[k])).string();
                const bool required =
                    std::binary_search(dyn_shapes.begin(), dyn_shapes.end(), all_shapes[i]) &&
                    std::binary_search(dyn_shapes.begin(), dyn_shapes.end(), all_shapes[k]);
                if (!std::filesystem::exists(file)) {
                    if (required)
                        throw ConfigError("neural backend: missing contact map " + file);
                    continue;
                }
                w.neural_maps.emplace(std::make_pair(all_shapes[i], all_shapes[k]),
                                      load_map(file));
            }
        }
    }
    return w;
}

struct FrameRecord {
    double t = 0.0;
    std::vector<Vec3> poses;       // (theta, x, y) in fixed scene order
    std::vector<Vec3> velocities;  // (omega, vx, vy)
};

inline void write_frame(std::ostream& os, const World& w) {
    nlohmann::json j;
    j["t"] = w.time;
    auto& bodies = j["bodies"] = nlohmann::json::array();
    for (const auto& b : w.bodies)
        bodies.push_back({b.q.theta, b.q.t.x, b.q.t.y, b.v.omega, b.v.v.x, b.v.v.y});
    os << j.dump() << "\n";
}

inline std::vector<FrameRecord> read_frames(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open frames: " + path);
    std::vector<FrameRecord> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        FrameRecord rec;
        rec.t = j.at("t").get<double>();
        for (const auto& b : j.at("bodies")) {
            rec.poses.push_back({{b.at(0).get<double>(), b.at(1).get<double>(),
                                  b.at(2).get<double>()}});
            rec.velocities.push_back({{b.at(3).get<double>(), b.at(4).get<double>(),
                                       b.at(5).get<double>()}});
        }
        out.push_back(std::move(rec));
    }
    return out;
}

struct MetricsRow {
    double t = 0.0;
    double max_displacement = 0.0;
    double kinetic_energy = 0.0;
    double max_penetration = 0.0;
    double height = 0.0;  // max over dynamic grains of y + bounding radius
    int discharged = 0;
};

inline void write_metrics_header(std::ostream& os) {
    os << "t,max_displacement,kinetic_energy,max_penetration,height,discharged\n";
}

inline void write_metrics_row(std::ostream& os, const MetricsRow& r) {
    os << r.t << "," << r.max_displacement << "," << r.kinetic_energy << ","
       << r.max_penetration << "," << r.height << "," << r.discharged << "\n";
}

inline MetricsRow measure(const World& w, const std::vector<Se2State>& initial,
                          std::optional<double> discharge_y, double max_penetration) {
    MetricsRow r;
    r.t = w.time;
    r.kinetic_energy = w.kinetic_energy();
    r.max_penetration = max_penetration;
    r.height = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < w.bodies.size(); ++i) {
        const auto& b = w.bodies[i];
        if (b.kind != BodyKind::dynamic) continue;
        r.max_displacement = std::max(r.max_displacement, (b.q.t - initial[i].t).norm());
        r.height = std::max(r.height, b.q.t.y + b.radius());
        if (discharge_y && b.q.t.y < *discharge_y) ++r.discharged;
    }
    if (!std::isfinite(r.height)) r.height = 0.0;
    return r;
}

// Full scene run; frame/metrics streams are optional. Returns the last
// metrics row (measured at the final step regardless of stride).
inline MetricsRow run_scene(const SceneConfig& scene, World& w, std::ostream* frames,
                            std::ostream* metrics,
                            const std::function<void(const World&)>& on_sample = {}) {
    std::vector<Se2State> initial;
    for (const auto& b : w.bodies) initial.push_back(b.q);
    if (metrics) write_metrics_header(*metrics);

    const long steps = static_cast<long>(std::llround(scene.duration / scene.params.dt));
    double window_penetration = 0.0;
    MetricsRow last;
    auto sample = [&](bool force) {
        if (w.step_count % scene.output_stride != 0 && !force) return;
        last = measure(w, initial, scene.discharge_y, window_penetration);
        window_penetration = 0.0;
        if (frames) write_frame(*frames, w);
        if (metrics) write_metrics_row(*metrics, last);
        if (on_sample) on_sample(w);
    };
    sample(false);  // initial state
    for (long k = 0; k < steps; ++k) {
        w.step();
        window_penetration = std::max(window_penetration, w.last_max_penetration);
        sample(k + 1 == steps);
    }
    return last;
}

}  // namespace cem
