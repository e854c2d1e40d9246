#pragma once

#include <filesystem>

#include "json.hpp"

#include "ddm/experiments.hpp"

namespace ddm {

using nlohmann::json;

void to_json(json& j, const ModelConfig& m);
void to_json(json& j, const SignalParams& p);
void to_json(json& j, const Signal& s);
void to_json(json& j, const ObservedData& d);
void to_json(json& j, const OracleResult& r);
void to_json(json& j, const SurrogateOracleResult& r);
void to_json(json& j, const EbrMembership& r);
void to_json(json& j, const SigmaConstants& k);
void to_json(json& j, const SigmaReport& r);
void to_json(json& j, const MinimaxRate& r);
void to_json(json& j, const CoversReport& r);
void to_json(json& j, const ParamDiagnostics& d);
void to_json(json& j, const MixtureWeights& w);
void to_json(json& j, const RadiusEstimate& r);
void to_json(json& j, const CredibleBall& b);
void to_json(json& j, const DefaultCenter& c);
void to_json(json& j, const ConditionEstimate& e);
void to_json(json& j, const PropositionBounds& b);
void to_json(json& j, const OversmoothingEstimate& e);
void to_json(json& j, const BallVolume& v);
void to_json(json& j, const SignalSpec& s);
void to_json(json& j, const ScaleSpec& s);
void to_json(json& j, const CalibrationSpec& c);
void to_json(json& j, const Thresholds& t);
void to_json(json& j, const ExperimentSpec& s);
void to_json(json& j, const Cell& c);
void to_json(json& j, const ExperimentReport& r);

ModelConfig model_from_json(const json& j);
SignalParams signal_params_from_json(const json& j);
// Accepts {kind, params, coeffs}. Without coeffs the signal is generated from
// kind and params at length n_trunc.
Signal signal_from_json(const json& j, Index n_trunc = 4096);
ObservedData data_from_json(const json& j);
SignalSpec signal_spec_from_json(const json& j);
ScaleSpec scale_spec_from_json(const json& j);
ExperimentSpec spec_from_json(const json& j);
Cell cell_from_json(const json& j);
ExperimentReport report_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& j, const std::filesystem::path& path);

}  // namespace ddm
