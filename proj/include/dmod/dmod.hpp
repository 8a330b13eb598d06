#ifndef DMOD_DMOD_HPP
#define DMOD_DMOD_HPP

#include "dmod/angles.hpp"
#include "dmod/errors.hpp"
#include "dmod/fields.hpp"
#include "dmod/io.hpp"
#include "dmod/modem.hpp"
#include "dmod/secure_link.hpp"
#include "dmod/switched_antenna.hpp"

#endif // DMOD_DMOD_HPP
