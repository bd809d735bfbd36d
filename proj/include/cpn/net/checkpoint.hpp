#ifndef CPN_NET_CHECKPOINT_HPP
#define CPN_NET_CHECKPOINT_HPP

#include <memory>
#include <string>

#include "cpn/net/model.hpp"
#include "cpn/nn/layers.hpp"

namespace cpn::net {

class FormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class TruncatedCheckpoint : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Versioned binary container: magic "CPNT", u32 version, config echo,
/// epoch counter, Adam step counter, then named tensors (parameters, batch
/// norm running stats, Adam moments) as little-endian float32. save -> load
/// -> save reproduces the bytes exactly.
struct Checkpoint {
    NetworkConfig config;
    int epoch = 0;
    long long adam_t = 0;
};

void checkpoint_save(const std::string& path, Classifier& model, int epoch,
                     long long adam_t);

/// Rebuilds the model from the embedded config and restores every tensor.
struct LoadedModel {
    std::unique_ptr<Classifier> model;
    int epoch = 0;
    long long adam_t = 0;
};

LoadedModel checkpoint_load(const std::string& path);

} // namespace cpn::net

#endif
