#ifndef QMEM_VERSION_HPP
#define QMEM_VERSION_HPP

namespace qmem {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qmem

#endif  // QMEM_VERSION_HPP
