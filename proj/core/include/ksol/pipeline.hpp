#pragma once

#include "ksol/local_existence.hpp"
#include "ksol/orbit_engine.hpp"
#include "ksol/phase_plane.hpp"
#include "ksol/soliton_profile.hpp"

namespace ksol {

struct SolveOptions {
    PicardOptions picard;
    IntegratorControls controls;
};

struct SolitonRun {
    SolitonParams params;
    double u0 = 0.0;    // requested u(0)
    double seed = 0.0;  // alpha handed to the local solver
    LocalSolution local;
    OrbitTrace trace;
    OrbitClass cls;
    ProfileTable table;
};

// Local solution, orbit, classification and profile for u(0) = u0.
SolitonRun solve_soliton(const SolitonParams& p, double u0, const SolveOptions& opts = {});

}  // namespace ksol
