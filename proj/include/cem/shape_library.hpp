#pragma once

// Shape library loader: resolves the parametric and explicit-polygon entries
// of data/shapes.json into validated Shape objects.

#include <fstream>
#include <map>

#include <json.hpp>

#include "cem/shape.hpp"

namespace cem {

using ShapeLibrary = std::map<std::string, Shape>;

inline ShapeLibrary load_shape_library(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open shape library: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("shape library parse error in " + path + ": " + e.what());
    }
    if (!j.contains("shapes") || !j["shapes"].is_array())
        throw std::runtime_error("shape library missing \"shapes\" array: " + path);

    ShapeLibrary lib;
    for (const auto& entry : j["shapes"]) {
        const std::string name = entry.at("name").get<std::string>();
        const double density = entry.value("density", 1.0);
        std::optional<Shape> shape;
        if (entry.contains("vertices")) {
            std::vector<Vec2> verts;
            for (const auto& v : entry["vertices"])
                verts.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            shape.emplace(name, verts, density);
        } else if (entry.contains("box")) {
            const auto& b = entry["box"];
            shape.emplace(make_box(name, b.at("width").get<double>(),
                                   b.at("height").get<double>(), density));
        } else if (entry.contains("ngon")) {
            const auto& n = entry["ngon"];
            shape.emplace(make_ngon(name, n.at("sides").get<int>(),
                                    n.at("radius").get<double>(), density));
        } else if (entry.contains("arc")) {
            const auto& a = entry["arc"];
            shape.emplace(make_arc(name, a.at("radius").get<double>(),
                                   a.at("thickness").get<double>(),
                                   a.at("fraction").get<double>(), density,
                                   a.value("segments", 64)));
        } else {
            throw std::runtime_error("shape \"" + name + "\" has no geometry entry");
        }
        if (!lib.emplace(name, std::move(*shape)).second)
            throw std::runtime_error("duplicate shape name \"" + name + "\"");
    }
    return lib;
}

}  // namespace cem
