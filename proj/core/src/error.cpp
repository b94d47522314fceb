#include "ccsp/error.hpp"

namespace ccsp {

void throw_invalid(const std::string& what) { throw Error(ErrorKind::invalid_argument, what); }
void throw_data(const std::string& what) { throw Error(ErrorKind::data, what); }
void throw_numerical(const std::string& what) { throw Error(ErrorKind::numerical, what); }
void throw_io(const std::string& what) { throw Error(ErrorKind::io, what); }

}  // namespace ccsp
