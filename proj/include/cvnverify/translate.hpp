#pragma once

#include "cvnverify/cir.hpp"
#include "cvnverify/cvn.hpp"

namespace cvnverify {

// Place and internal-variable naming. Internal names use parentheses so they
// can never collide with user identifiers.
std::string control_place_name(const std::string& fn, const std::string& sid);
std::string return_place_name(const std::string& fn);
std::string resource_place_name(const std::string& resource);
std::string wait_place_name(const std::string& sid);
std::string reacquire_place_name(const std::string& sid);
std::string waiter_count_var(const std::string& cv);
std::string notify_all_flag_var(const std::string& sid);

// Builds the net for a checker-clean artifact. Layout is deterministic:
// resource places in declaration order, then per function (declaration
// order) one control place per statement with wait/reacquire places inline
// after each wait site, then the function's return place. The single initial
// control token sits at the entry function's first statement.
Cvn translate_artifact(const CirArtifact& artifact);

}  // namespace cvnverify
