#include "twinflow/demand/profile.hpp"

namespace twinflow::demand {

std::string to_string(CarFollowingModel m) {
    switch (m) {
        case CarFollowingModel::krauss_default: return "krauss_default";
        case CarFollowingModel::krauss_lookahead: return "krauss_lookahead";
        case CarFollowingModel::wagner: return "wagner";
        case CarFollowingModel::wiedemann: return "wiedemann";
        case CarFollowingModel::acc: return "acc";
    }
    return "krauss_default";
}

CarFollowingModel car_following_from_string(const std::string& s) {
    if (s == "krauss_default") return CarFollowingModel::krauss_default;
    if (s == "krauss_lookahead") return CarFollowingModel::krauss_lookahead;
    if (s == "wagner") return CarFollowingModel::wagner;
    if (s == "wiedemann") return CarFollowingModel::wiedemann;
    if (s == "acc") return CarFollowingModel::acc;
    throw DemandError("unknown car-following model: " + s);
}

const std::vector<CarFollowingModel>& all_car_following_models() {
    static const std::vector<CarFollowingModel> models = {
        CarFollowingModel::krauss_default, CarFollowingModel::krauss_lookahead, CarFollowingModel::wagner,
        CarFollowingModel::wiedemann, CarFollowingModel::acc};
    return models;
}

const std::vector<std::string>& aggressiveness_labels() {
    static const std::vector<std::string> labels = {"aggressive_young",       "courteous_young",
                                                    "aggressive_middle_aged", "courteous_middle_aged",
                                                    "aggressive_old",         "courteous_old"};
    return labels;
}

AggressivenessProfile make_profile(const std::string& aggressiveness_type) {
    if (aggressiveness_type == "aggressive_young") return {3.1, -5.5, -9.0, 1.2, 1.0};
    if (aggressiveness_type == "courteous_young") return {2.5, -4.5, -9.0, 2.5, 1.0};
    if (aggressiveness_type == "aggressive_middle_aged") return {2.9, -5.0, -9.0, 2.0, 1.3};
    if (aggressiveness_type == "courteous_middle_aged") return {2.4, -4.1, -9.0, 2.5, 1.5};
    if (aggressiveness_type == "aggressive_old") return {2.6, -4.5, -9.0, 2.0, 1.7};
    if (aggressiveness_type == "courteous_old") return {2.3, -3.8, -9.0, 2.5, 1.9};
    throw DemandError("unknown aggressiveness type: " + aggressiveness_type);
}

}  // namespace twinflow::demand
