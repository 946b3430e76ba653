#ifndef HOCBF_VERSION_HPP
#define HOCBF_VERSION_HPP

namespace hocbf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hocbf

#endif  // HOCBF_VERSION_HPP
