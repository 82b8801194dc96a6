#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gibbslab/fharm.hpp"
#include "gibbslab/fuchsian.hpp"
#include "gibbslab/io.hpp"
#include "gibbslab/potential.hpp"
#include "gibbslab/suspension.hpp"
#include "gibbslab/thermo.hpp"

namespace gibbslab::cli {

using io::json;

GroupPresentation group_from_config(const json& cfg);
Potential potential_from_config(const json& cfg, const GroupPresentation& g);
// f(theta) = a + b cos(k theta)
std::function<double(double)> density_from_config(const json& cfg);

// Shared state for one run, computed on first use.
class Session {
public:
    explicit Session(json cfg);

    const json& cfg() const { return cfg_; }
    std::uint64_t seed() const { return cfg_.at("seed").get<std::uint64_t>(); }
    const GroupPresentation& group();
    const Potential& potential();
    const GroupBall& ball();                      // radius ball.radius
    const GroupBall& ball(double radius);         // prefix of a ball of at least that radius
    const std::vector<double>& integrals();       // over ball()
    const PressureEstimate& pressure();
    double R0();
    const PattersonMeasure& patterson();
    GibbsContext context();
    EnumerateOptions enumerate_options() const;

private:
    json cfg_;
    std::optional<GroupPresentation> group_;
    std::optional<Potential> potential_;
    std::optional<GroupBall> ball_;
    std::vector<std::pair<double, GroupBall>> extra_balls_;
    std::optional<std::vector<double>> integrals_;
    std::optional<PressureEstimate> pressure_;
    std::optional<double> R0_;
    std::optional<PattersonMeasure> patterson_;
};

// A stage writes its artifacts and appends "<stage>.<quantity>" names of failed tolerances.
struct StageResult {
    std::vector<std::string> failures;
    json summary = json::object();
};

using StageFn = StageResult (*)(Session&, io::Artifacts&);

struct Stage {
    const char* name;
    StageFn run;
};

const std::vector<Stage>& stages();

}  // namespace gibbslab::cli
