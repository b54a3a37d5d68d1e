#pragma once

#include <string>

#include <json.hpp>

#include "pecf/nn/network.hpp"

namespace pecf::nn {

inline nlohmann::json spec_to_json(const network_spec& spec) {
    nlohmann::json layers = nlohmann::json::array();
    for (const layer_spec& l : spec.layers) {
        layers.push_back({{"kind", to_string(l.kind)},
                          {"units", l.units},
                          {"activation", to_string(l.act)},
                          {"activation_cap", l.activation_cap},
                          {"return_sequences", l.return_sequences}});
    }
    return {{"input_features", spec.input_features},
            {"output_targets", spec.output_targets},
            {"seed", spec.seed},
            {"layers", layers}};
}

inline network_spec spec_from_json(const nlohmann::json& j) {
    network_spec spec;
    spec.input_features = j.at("input_features").get<std::size_t>();
    spec.output_targets = j.at("output_targets").get<std::size_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    for (const nlohmann::json& lj : j.at("layers")) {
        layer_spec l;
        l.kind = parse_layer_kind(lj.at("kind").get<std::string>());
        l.units = lj.at("units").get<std::size_t>();
        l.act = parse_activation(lj.at("activation").get<std::string>());
        l.activation_cap = lj.at("activation_cap").get<double>();
        l.return_sequences = lj.at("return_sequences").get<bool>();
        spec.layers.push_back(l);
    }
    return spec;
}

/// Serializes the architecture, seed and every weight tensor. Doubles ride
/// through JSON on the shortest-round-trip representation the serializer
/// emits, so a save/load cycle reproduces weights bit for bit.
inline nlohmann::json checkpoint_to_json(network& net) {
    nlohmann::json tensors = nlohmann::json::object();
    for (const param_ref& p : net.params())
        tensors[p.name] = {{"shape", p.value->shape}, {"data", p.value->data}};
    return {{"format", "pecf-checkpoint"},
            {"version", 1},
            {"spec", spec_to_json(net.spec())},
            {"seed", net.spec().seed},
            {"tensors", tensors}};
}

/// Rebuilds a network from a checkpoint, replacing every freshly initialized
/// tensor with the stored one. Name or shape mismatches are structural
/// corruption and throw.
inline network checkpoint_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "pecf-checkpoint")
        throw std::runtime_error("checkpoint: unrecognized format field");
    network net(spec_from_json(j.at("spec")));
    const nlohmann::json& tensors = j.at("tensors");
    auto params = net.params();
    if (tensors.size() != params.size())
        throw std::runtime_error("checkpoint: expected " + std::to_string(params.size()) +
                                 " tensors, found " + std::to_string(tensors.size()));
    for (param_ref& p : params) {
        const auto it = tensors.find(p.name);
        if (it == tensors.end())
            throw std::runtime_error("checkpoint: missing tensor " + p.name);
        const auto shape = it->at("shape").get<std::vector<std::size_t>>();
        if (shape != p.value->shape)
            throw std::runtime_error("checkpoint: tensor " + p.name + " has wrong shape");
        std::size_t expected = 1;
        for (const std::size_t d : shape) expected *= d;
        p.value->data = it->at("data").get<std::vector<double>>();
        if (p.value->data.size() != expected)
            throw std::runtime_error("checkpoint: tensor " + p.name + " has wrong data length");
    }
    return net;
}

} // namespace pecf::nn
