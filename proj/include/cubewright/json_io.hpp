#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "cubewright/algebra.hpp"

namespace cubewright {

using json = nlohmann::ordered_json;

// Algebra file format:
//   {"name": string?, "size": int >= 1,
//    "operations": [{"name": string, "arity": int >= 0, "table": [int,...]}]}
// Tables are flat, row-major, leftmost argument most significant.
inline FiniteAlgebra parse_algebra(const std::string& text, const std::string& where = "") {
    auto loc = [&](const std::string& detail) {
        return where.empty() ? detail : where + ": " + detail;
    };
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw format_error(loc(e.what()));
    }
    if (!doc.is_object()) throw format_error(loc("top level must be an object"));
    FiniteAlgebra alg;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) throw format_error(loc("\"name\" must be a string"));
        alg.name = doc["name"].get<std::string>();
    }
    if (!doc.contains("size") || !doc["size"].is_number_integer()) {
        throw format_error(loc("missing integer \"size\""));
    }
    long long size = doc["size"].get<long long>();
    if (size < 1 || size > kMaxUniverse) {
        throw format_error(loc("\"size\" must be in [1," + std::to_string(kMaxUniverse) + "]"));
    }
    alg.size = static_cast<int>(size);
    if (!doc.contains("operations") || !doc["operations"].is_array()) {
        throw format_error(loc("missing array \"operations\""));
    }
    for (std::size_t i = 0; i < doc["operations"].size(); ++i) {
        const json& jop = doc["operations"][i];
        std::string at = "operations[" + std::to_string(i) + "]";
        if (!jop.is_object()) throw format_error(loc(at + " must be an object"));
        Operation op;
        if (!jop.contains("name") || !jop["name"].is_string()) {
            throw format_error(loc(at + ": missing string \"name\""));
        }
        op.name = jop["name"].get<std::string>();
        if (!jop.contains("arity") || !jop["arity"].is_number_integer()) {
            throw format_error(loc(at + ": missing integer \"arity\""));
        }
        long long arity = jop["arity"].get<long long>();
        if (arity < 0 || arity > 16) throw format_error(loc(at + ": arity must be in [0,16]"));
        op.arity = static_cast<int>(arity);
        if (!jop.contains("table") || !jop["table"].is_array()) {
            throw format_error(loc(at + ": missing array \"table\""));
        }
        for (std::size_t j = 0; j < jop["table"].size(); ++j) {
            const json& entry = jop["table"][j];
            if (!entry.is_number_integer()) {
                throw format_error(loc(at + ": table entry " + std::to_string(j) + " is not an integer"));
            }
            long long v = entry.get<long long>();
            if (v < 0 || v >= size) {
                throw format_error(loc(at + ": table entry " + std::to_string(j) + " is " +
                                       std::to_string(v) + ", out of range [0," + std::to_string(size) + ")"));
            }
            op.table.push_back(static_cast<Elem>(v));
        }
        alg.operations.push_back(std::move(op));
    }
    alg.validate(where);
    return alg;
}

inline FiniteAlgebra load_algebra_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error(path + ": cannot open file");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_algebra(text, path);
}

inline json algebra_to_json(const FiniteAlgebra& alg) {
    json doc;
    if (!alg.name.empty()) doc["name"] = alg.name;
    doc["size"] = alg.size;
    doc["operations"] = json::array();
    for (const Operation& op : alg.operations) {
        json jop;
        jop["name"] = op.name;
        jop["arity"] = op.arity;
        json table = json::array();
        for (Elem e : op.table) table.push_back(static_cast<int>(e));
        jop["table"] = std::move(table);
        doc["operations"].push_back(std::move(jop));
    }
    return doc;
}

} // namespace cubewright
