#ifndef MZSG_VERSION_HPP
#define MZSG_VERSION_HPP

namespace mzsg {

inline constexpr const char* kVersion = "0.1.0";

} // namespace mzsg

#endif // MZSG_VERSION_HPP
