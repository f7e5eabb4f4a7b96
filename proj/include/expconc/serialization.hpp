#pragma once

#include "expconc/concentration.hpp"
#include "expconc/experiments.hpp"
#include "expconc/expconcavity.hpp"
#include "expconc/functional.hpp"
#include "expconc/samplers.hpp"

#include <json.hpp>

namespace expconc {

using Json = nlohmann::ordered_json;

/// Finite doubles as numbers; infinities and NaN as the strings "inf", "-inf", "nan".
Json number(double x);
Json vector_json(const Vector& x);
Json vector_json(const std::vector<double>& x);

Json to_json(const Estimate& e);
Json to_json(const SamplerDiagnostics& d);
Json to_json(const BoundSpec& b);
Json to_json(const EtaCertificate& c);
Json to_json(const TailReport& r);
Json to_json(const VarianceReport& r);
Json to_json(const RegimeTable& t);
Json to_json(const BlQuadratureResult& r);
Json to_json(const BlMonteCarloResult& r);
Json to_json(const DeviationFrequency& r);
Json to_json(const HpdResult& r);
/// Summary statistics and tail reports; per-sample values are left out.
Json to_json(const InformationDensityReport& r);
Json to_json(const OnlineRound& r);

}  // namespace expconc
