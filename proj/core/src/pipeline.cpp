#include "ksol/pipeline.hpp"

namespace ksol {

SolitonRun solve_soliton(const SolitonParams& p, double u0, const SolveOptions& opts) {
    SolitonRun run;
    run.params = p;
    run.u0 = u0;
    run.seed = seed_for_center_value(u0, p);
    run.local = picard_solve(run.seed, p, opts.picard);
    run.trace = integrate(run.local, p, opts.controls);
    run.cls = classify_orbit(run.trace, p);
    run.table = reconstruct_u(run.trace, p);
    return run;
}

}  // namespace ksol
