#pragma once

// Umbrella header.

#include "conjsig/attack_lab.hpp"
#include "conjsig/bytes.hpp"
#include "conjsig/drbg.hpp"
#include "conjsig/hash_to_group.hpp"
#include "conjsig/keys.hpp"
#include "conjsig/ledger.hpp"
#include "conjsig/matrix.hpp"
#include "conjsig/platform_group.hpp"
#include "conjsig/sha256.hpp"
#include "conjsig/signature.hpp"
#include "conjsig/wire.hpp"
