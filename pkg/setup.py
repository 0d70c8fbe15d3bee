#!/usr/bin/env python3
"""
Setup script for NLPF
Writes the demo clouds used by the dashboard and the CLI examples
"""
import sys
import os

# Add current directory to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from geometry.synthetic import generate_demo_models


def setup(directory: str = 'data'):
    """Generate the bundled demo clouds"""
    print("🚀 Setting up NLPF...")
    print()

    print("📝 Generating demo clouds...")
    try:
        generate_demo_models(directory)
    except OSError as e:
        print(f"❌ Failed to write demo clouds: {str(e)}")
        return False

    print()
    print("=" * 60)
    print("✅ NLPF setup completed successfully!")
    print("=" * 60)
    print()
    print("🎯 Next steps:")
    print()
    print("1. Filter a noisy cloud:")
    print(f"   python -m cloud_io.cli filter --in {directory}/cube_noise1.0.xyz --out cube_filtered.xyz")
    print()
    print("2. Score it against the clean model:")
    print(f"   python -m cloud_io.cli metrics --ref {directory}/cube.xyz --in cube_filtered.xyz")
    print()
    print("3. Start the dashboard:")
    print("   streamlit run dashboard/app.py")
    print()
    print("📚 For more details, see README.md")
    print()

    return True


if __name__ == "__main__":
    success = setup(sys.argv[1] if len(sys.argv) > 1 else 'data')
    sys.exit(0 if success else 1)
