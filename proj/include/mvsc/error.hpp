#pragma once

#include <stdexcept>
#include <string>

namespace mvsc {

// Error codes grouped by the exit category the CLI maps them to:
// config (2), data (3), numeric (4).
enum class errc {
  // config / usage
  invalid_argument,
  invalid_k,
  // data
  unreadable_file,
  malformed_header,
  dim_mismatch,
  duplicate_token,
  non_finite,
  truncated,
  empty_table,
  no_noun,
  duplicate,
  untranslated,
  oov_concept,
  no_representatives,
  empty_selection,
  // numeric
  domain_error,
  constant_series,
  zero_row,
  zero_vector,
  no_pairs,
  no_multi_clusters,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_argument:   return "INVALID_ARGUMENT";
    case errc::invalid_k:          return "INVALID_K";
    case errc::unreadable_file:    return "UNREADABLE_FILE";
    case errc::malformed_header:   return "MALFORMED_HEADER";
    case errc::dim_mismatch:       return "DIM_MISMATCH";
    case errc::duplicate_token:    return "DUPLICATE_TOKEN";
    case errc::non_finite:         return "NON_FINITE";
    case errc::truncated:          return "TRUNCATED";
    case errc::empty_table:        return "EMPTY_TABLE";
    case errc::no_noun:            return "NO_NOUN";
    case errc::duplicate:          return "DUPLICATE";
    case errc::untranslated:       return "UNTRANSLATED";
    case errc::oov_concept:        return "OOV_CONCEPT";
    case errc::no_representatives: return "NO_REPRESENTATIVES";
    case errc::empty_selection:    return "EMPTY_SELECTION";
    case errc::domain_error:       return "DOMAIN_ERROR";
    case errc::constant_series:    return "CONSTANT_SERIES";
    case errc::zero_row:           return "ZERO_ROW";
    case errc::zero_vector:        return "ZERO_VECTOR";
    case errc::no_pairs:           return "NO_PAIRS";
    case errc::no_multi_clusters:  return "NO_MULTI_CLUSTERS";
  }
  return "UNKNOWN";
}

// Exit code category per the CLI contract.
inline int exit_category(errc c) {
  switch (c) {
    case errc::invalid_argument:
    case errc::invalid_k:
      return 2;
    case errc::domain_error:
    case errc::constant_series:
    case errc::zero_row:
    case errc::zero_vector:
    case errc::no_pairs:
    case errc::no_multi_clusters:
      return 4;
    default:
      return 3;
  }
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

}  // namespace mvsc
