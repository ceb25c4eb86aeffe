#include "flowlab/serialize.hpp"

#include <cmath>
#include <stdexcept>

namespace flowlab {

using nlohmann::json;

json drift_to_json(const DriftField& f) {
    json j;
    j["bound"] = f.bound();
    j["lipschitz"] = f.lipschitz();
    if (f.eval_scale() != 1.0) j["scale"] = f.eval_scale();
    switch (f.kind()) {
        case DriftField::Kind::Constant:
            j["kind"] = "constant";
            j["value"] = f.constant_value();
            break;
        case DriftField::Kind::Table:
            j["kind"] = "table";
            j["radii"] = f.knot_radii();
            j["values"] = f.knot_values();
            break;
        case DriftField::Kind::Named:
            j["kind"] = "named";
            j["family"] = f.family();
            j["params"] = f.params();
            break;
    }
    return j;
}

DriftField drift_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    DriftField f = DriftField::constant(0.0);
    if (kind == "constant") {
        f = DriftField::constant(j.at("value").get<double>());
    } else if (kind == "table") {
        f = DriftField::table(j.at("radii").get<std::vector<double>>(),
                              j.at("values").get<std::vector<double>>(),
                              j.at("bound").get<double>(), j.at("lipschitz").get<double>());
    } else if (kind == "named") {
        f = DriftField::named(j.at("family").get<std::string>(),
                              j.at("params").get<std::map<std::string, double>>(),
                              j.at("bound").get<double>(), j.at("lipschitz").get<double>());
    } else {
        throw std::invalid_argument("drift_from_json: unknown kind '" + kind + "'");
    }
    if (j.contains("scale")) f = f.rescaled(j.at("scale").get<double>());
    return f;
}

json region_to_json(const Region& r) {
    json j;
    j["dimension"] = r.dimension;
    switch (r.kind) {
        case Region::Kind::HalfSpace:
            j["kind"] = "half_space";
            j["level"] = r.level;
            j["lateral_radius"] = r.lateral_radius;
            break;
        case Region::Kind::BallComplement:
            j["kind"] = "ball_complement";
            j["center"] = r.center;
            j["radius"] = r.radius;
            break;
        case Region::Kind::LateralDisc:
            j["kind"] = "lateral_disc";
            j["level"] = r.level;
            j["lateral_radius"] = r.lateral_radius;
            j["lateral_center"] = r.lateral_center;
            break;
        case Region::Kind::Cylinder:
            j["kind"] = "cylinder";
            j["level"] = r.level;
            j["delta"] = r.delta;
            j["lateral_center"] = r.lateral_center;
            break;
    }
    return j;
}

Region region_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int n = j.at("dimension").get<int>();
    if (kind == "half_space")
        return Region::half_space(n, j.at("level").get<double>(),
                                  j.at("lateral_radius").get<double>());
    if (kind == "ball_complement")
        return Region::ball_complement(n, j.at("center").get<PointN>(),
                                       j.at("radius").get<double>());
    if (kind == "lateral_disc")
        return Region::lateral_disc(n, j.at("level").get<double>(),
                                    j.at("lateral_radius").get<double>(),
                                    j.value("lateral_center", std::vector<double>{}));
    if (kind == "cylinder") {
        PointN corner(static_cast<std::size_t>(n));
        corner[0] = j.at("level").get<double>();
        const auto lc = j.at("lateral_center").get<std::vector<double>>();
        for (int c = 1; c < n; ++c) corner[static_cast<std::size_t>(c)] = lc[static_cast<std::size_t>(c - 1)];
        return Region::cylinder(n, corner, j.at("delta").get<double>());
    }
    throw std::invalid_argument("region_from_json: unknown kind '" + kind + "'");
}

json flow_config_to_json(const FlowConfig& c) {
    json j;
    j["dimension"] = c.dimension;
    j["drift"] = drift_to_json(c.drift);
    j["truncation"] = c.truncation;
    j["horizon"] = c.horizon;
    j["dt"] = c.dt;
    j["region"] = region_to_json(c.region);
    j["tracer_budget"] = c.tracer_budget;
    j["seed"] = c.seed;
    j["path_index"] = c.path_index;
    return j;
}

FlowConfig flow_config_from_json(const json& j) {
    FlowConfig c;
    c.dimension = j.at("dimension").get<int>();
    c.drift = drift_from_json(j.at("drift"));
    c.truncation = j.at("truncation").get<double>();
    c.horizon = j.at("horizon").get<double>();
    c.dt = j.at("dt").get<double>();
    c.region = region_from_json(j.at("region"));
    c.tracer_budget = j.at("tracer_budget").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.path_index = j.at("path_index").get<std::uint64_t>();
    return c;
}

json flow_result_to_json_tree(const FlowResult& r, std::size_t max_series_points) {
    json j;
    j["config"] = flow_config_to_json(r.config);
    j["hit"] = r.hit;
    if (r.hit) j["tau_hat"] = r.tau_hat;
    j["hit_label"] = r.hit_label;
    j["steps_run"] = r.steps_run;
    j["refined"] = r.refined;
    j["budget_exhausted"] = r.budget_exhausted;
    j["skipped_drift_bound"] = r.skipped_drift_bound;
    j["final_b"] = r.final_b;

    std::size_t stride = 1;
    if (max_series_points > 0 && r.min_distance.size() > max_series_points)
        stride = (r.min_distance.size() + max_series_points - 1) / max_series_points;
    j["series_stride"] = stride;
    json dist = json::array();
    json labels = json::array();
    for (std::size_t k = 0; k < r.min_distance.size(); k += stride) {
        dist.push_back(r.min_distance[k]);
        labels.push_back(r.argmin_label[k]);
    }
    // the sharpest approach is always kept
    std::size_t best = 0;
    for (std::size_t k = 1; k < r.min_distance.size(); ++k)
        if (r.min_distance[k] < r.min_distance[best]) best = k;
    if (!r.min_distance.empty()) {
        j["min_distance_overall"] = r.min_distance[best];
        j["min_distance_step"] = best;
    }
    j["min_distance"] = std::move(dist);
    j["argmin_label"] = std::move(labels);
    return j;
}

std::string flow_result_to_json(const FlowResult& result, std::size_t max_series_points) {
    return flow_result_to_json_tree(result, max_series_points).dump(2);
}

} // namespace flowlab
