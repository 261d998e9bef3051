#pragma once

#include <string>

#include "obslab/config.hpp"
#include "obslab/report.hpp"

namespace obslab {

// Executes one named experiment and persists the RunRecord (JSON) plus any
// ratio/curve tables (CSV) under out_dir.  Returns the process exit status:
// 0 = all asserted invariants pass, 1 = an invariant failed (the witness is
// in the record), 2 = unusable configuration.
int run_subcommand(const std::string& name, Config& config);

// The individual experiments; each returns the record it would persist.
RunRecord run_ellipticity(const Config& c);
RunRecord run_kernel_check(const Config& c);
RunRecord run_propagate(const Config& c);
RunRecord run_thickness(const Config& c);
RunRecord run_uncertainty(const Config& c);
RunRecord run_dissipation(const Config& c);
RunRecord run_cobs(const Config& c);
RunRecord run_observe(const Config& c);
RunRecord run_falsify(const Config& c);
RunRecord run_ou_check(const Config& c);
RunRecord run_ou_observe(const Config& c);

}  // namespace obslab
