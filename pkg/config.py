"""
Configuration management for posetlab
Loads environment variables and provides configuration access
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
env_path = Path(__file__).parent / '.env'
if env_path.exists():
    load_dotenv(env_path)

# Randomness
POSETLAB_SEED = int(os.getenv('POSETLAB_SEED', '20240601'))

# Worker budget (the CLI --threads default)
POSETLAB_THREADS = int(os.getenv('POSETLAB_THREADS', '1'))

# Report output
POSETLAB_FORMAT = os.getenv('POSETLAB_FORMAT', 'csv').lower()

# Oracle scale gates
ORACLE_MAX_COMBINATIONS = int(os.getenv('POSETLAB_ORACLE_MAX_COMBINATIONS', '2000000'))
ORACLE_EXHAUSTIVE_N = int(os.getenv('POSETLAB_ORACLE_EXHAUSTIVE_N', '5'))

VERBOSE = os.getenv('POSETLAB_VERBOSE', 'false').lower() == 'true'


def config_issues():
    """Return a list of human-readable problems with the current configuration."""
    issues = []

    if POSETLAB_SEED < 0 or POSETLAB_SEED >= 2**64:
        issues.append("POSETLAB_SEED must be a 64-bit unsigned integer")
    if POSETLAB_THREADS < 1:
        issues.append("POSETLAB_THREADS must be at least 1")
    if POSETLAB_FORMAT not in ('csv', 'json'):
        issues.append(f"POSETLAB_FORMAT must be csv or json (got '{POSETLAB_FORMAT}')")
    if ORACLE_MAX_COMBINATIONS < 1:
        issues.append("POSETLAB_ORACLE_MAX_COMBINATIONS must be positive")
    if not 1 <= ORACLE_EXHAUSTIVE_N <= 6:
        issues.append("POSETLAB_ORACLE_EXHAUSTIVE_N must lie in 1..6")

    return issues


def validate_config():
    """Validate the configuration, printing a banner of issues if any."""
    issues = config_issues()

    if issues:
        print("\n" + "="*80)
        print("⚠ CONFIGURATION ISSUES")
        print("="*80)
        for issue in issues:
            print(f"  • {issue}")
        print("\nTo fix:")
        print("  1. Copy .env.example to .env")
        print("  2. Correct the values listed above")
        print("="*80 + "\n")
        return False

    return True


if __name__ == "__main__":
    print("\n" + "="*80)
    print("CONFIGURATION STATUS")
    print("="*80)
    print(f".env file: {'✓ ' + str(env_path) if env_path.exists() else '✗ not found (using defaults)'}")
    print(f"Seed: {POSETLAB_SEED}")
    print(f"Threads: {POSETLAB_THREADS}")
    print(f"Report format: {POSETLAB_FORMAT}")
    print(f"Oracle combination limit: {ORACLE_MAX_COMBINATIONS}")
    print(f"Oracle exhaustive n: {ORACLE_EXHAUSTIVE_N}")
    print(f"Verbose: {VERBOSE}")
    print("="*80 + "\n")

    if validate_config():
        print("✓ Configuration is valid!")
    else:
        print("✗ Configuration has issues (see above)")
