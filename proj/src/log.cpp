#include "ev2r/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "ev2r/error.hpp"

namespace ev2r {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::LabelSpaceMismatch: return "LabelSpaceMismatch";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::AuthMissing: return "AuthMissing";
    case ErrorKind::LogprobsUnavailable: return "LogprobsUnavailable";
    case ErrorKind::MissingReference: return "MissingReference";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::NoNoiseCandidate: return "NoNoiseCandidate";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::UnequalRaterCounts: return "UnequalRaterCounts";
    case ErrorKind::DegenerateExpectedAgreement: return "DegenerateExpectedAgreement";
    case ErrorKind::InsufficientPairs: return "InsufficientPairs";
    case ErrorKind::EmptyJoin: return "EmptyJoin";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Transport: return "Transport";
  }
  return "Unknown";
}

namespace log {
namespace {
std::atomic<Level> g_level{Level::info};
std::mutex g_mutex;

const char* tag(Level l) {
  switch (l) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    case Level::off: return "";
  }
  return "";
}
}  // namespace

void set_level(Level l) { g_level.store(l); }
Level level() { return g_level.load(); }

void write(Level l, std::string_view message) {
  if (l < g_level.load() || l == Level::off) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "level=" << tag(l) << " msg=\"" << message << "\"\n";
}

}  // namespace log
}  // namespace ev2r
