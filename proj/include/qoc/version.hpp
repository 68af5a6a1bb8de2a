#ifndef QOC_VERSION_HPP
#define QOC_VERSION_HPP

namespace qoc {

inline constexpr const char* artifact_version = "0.1.0";

} // namespace qoc

#endif
