#include "gradekit/version.hpp"

namespace gradekit {

const char* version() noexcept { return GRADEKIT_VERSION; }

}  // namespace gradekit
